//! Self-similar profiles: march the similarity-frame equation to its
//! steady state and measure the profile's tail.

use crate::error::{Error, Result};
use crate::evolve::{evolve_similarity, SchemeConfig};
use crate::field::Field;
use crate::fit;
use crate::flux::FluxFunction;

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Give up (NoSteadyState) past this much log-time.
    pub s_max: f64,
    /// Requested similarity step; the CFL limit may shrink it.
    pub ds: f64,
    /// Steady when the state moves less than this per unit log-time.
    pub tol: f64,
    /// Residuals are measured across blocks of this log-time width.
    pub block: f64,
    pub scheme: SchemeConfig,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { s_max: 40.0, ds: 0.05, tol: 1e-8, block: 2.0, scheme: SchemeConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct ProfileResult {
    pub field: Field,
    /// sup-norm movement per unit log-time over the last block.
    pub residual: f64,
    pub s_elapsed: f64,
    pub steps: usize,
}

/// March to the similarity steady state.
pub fn compute_profile(
    initial: &Field,
    flux: &FluxFunction,
    opts: &ProfileOptions,
) -> Result<ProfileResult> {
    if !(opts.block > 0.0) || !(opts.tol > 0.0) || !(opts.s_max > 0.0) {
        return Err(Error::InvalidArgument("profile options must be positive".into()));
    }
    let mut current = initial.clone();
    let mut steps = 0usize;
    let mut residuals: Vec<f64> = Vec::new();
    let s0 = initial.time();
    loop {
        let s_next = current.time() + opts.block;
        let out = evolve_similarity(&current, flux, s_next, opts.ds, &opts.scheme)?;
        steps += out.steps;
        let moved = out
            .field
            .values()
            .iter()
            .zip(current.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let residual = moved / opts.block;
        residuals.push(residual);
        current = out.field;
        if residual < opts.tol {
            return Ok(ProfileResult {
                field: current,
                residual,
                s_elapsed: residuals.len() as f64 * opts.block,
                steps,
            });
        }
        if current.time() - s0 >= opts.s_max - 1e-12 {
            let tail: Vec<f64> =
                residuals.iter().rev().take(6).rev().cloned().collect();
            return Err(Error::NoSteadyState { s_max: opts.s_max, tail });
        }
    }
}

/// Largest upward and downward jumps between neighbouring samples (1d).
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport {
    pub max_rise: f64,
    pub max_drop: f64,
}

impl MonotonicityReport {
    pub fn nonincreasing_within(&self, slack: f64) -> bool {
        self.max_rise <= slack
    }
}

pub fn monotonicity_report(field: &Field) -> Result<MonotonicityReport> {
    if field.grid().dim() != 1 {
        return Err(Error::Dimension { required: 1, actual: field.grid().dim() });
    }
    let mut rise = 0.0f64;
    let mut drop = 0.0f64;
    for w in field.values().windows(2) {
        let d = w[1] - w[0];
        rise = rise.max(d);
        drop = drop.max(-d);
    }
    Ok(MonotonicityReport { max_rise: rise, max_drop: drop })
}

#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub exponent: f64,
    pub stderr: f64,
    pub prefactor: f64,
    /// Largest symmetric-part mismatch over the window, the size of the
    /// periodic-wrap contamination in the tail signal.
    pub truncation: f64,
    pub samples: usize,
}

/// Fit |U(y) - far limit| ~ C |y|^b over |y| in [lo, hi], both sides.
///
/// Refuses (TailFit error) when the window reaches into the outer fifth of
/// the box where the wrap dominates, when fewer than 8 nodes fall inside,
/// when the tail signal touches zero, or when the wrap contamination is
/// comparable to the signal itself.
pub fn fit_tail(field: &Field, lo: f64, hi: f64) -> Result<TailFit> {
    let grid = field.grid();
    if grid.dim() != 1 {
        return Err(Error::Dimension { required: 1, actual: grid.dim() });
    }
    let bg = field
        .background()
        .ok_or_else(|| Error::TailFit("tail fit needs far-field limits from a background".into()))?;
    let (left_limit, right_limit) = bg.limits_1d()?;
    let (_, mu) = bg.step_params().expect("1d background is a step");
    if !(0.0 < lo && lo < hi) {
        return Err(Error::TailFit(format!("bad window [{lo}, {hi}]")));
    }
    if hi > 0.8 * grid.half_width() {
        return Err(Error::TailFit(format!(
            "window end {hi} reaches past 0.8 X = {}; the wrap owns that zone",
            0.8 * grid.half_width()
        )));
    }
    let v = field.values();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    let mut truncation = 0.0f64;
    for (i, y) in grid.axis_coords().enumerate() {
        let r = y.abs();
        if r < lo || r > hi {
            continue;
        }
        let limit = if y > 0.0 { right_limit } else { left_limit };
        let w = (v[i] - limit).abs();
        ys.push(r);
        ws.push(w);
        let j = grid.nearest_index(-y, 0.0);
        truncation = truncation.max(0.5 * (v[i] + v[j] - 2.0 * mu).abs());
    }
    if ys.len() < 8 {
        return Err(Error::TailFit(format!("only {} nodes in the window", ys.len())));
    }
    let w_min = ws.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(w_min > 0.0) {
        return Err(Error::TailFit("tail signal touches zero inside the window".into()));
    }
    if truncation > 0.5 * w_min {
        return Err(Error::TailFit(format!(
            "wrap contamination {truncation:.3e} comparable to the weakest tail signal {w_min:.3e}"
        )));
    }
    let pf = fit::fit_power_law(&ys, &ws)?;
    Ok(TailFit {
        exponent: pf.exponent,
        stderr: pf.stderr,
        prefactor: pf.prefactor,
        truncation,
        samples: ys.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::FarFieldProfile;
    use crate::field::make_shock_data;
    use crate::grid::Grid;

    #[test]
    fn linear_profile_is_already_steady() {
        let g = Grid::new_1d(512, 64.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let flux = FluxFunction::zero(1);
        let res = compute_profile(&field, &flux, &ProfileOptions::default()).unwrap();
        assert!(res.residual < 1e-10, "residual {}", res.residual);
        assert!(res.s_elapsed <= 2.0 + 1e-12);
    }

    #[test]
    fn far_from_steady_reports_no_steady_state() {
        let g = Grid::new_1d(256, 64.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 4.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let flux = FluxFunction::zero(1);
        let opts = ProfileOptions { s_max: 1.0, block: 0.5, tol: 1e-10, ..Default::default() };
        match compute_profile(&field, &flux, &opts) {
            Err(Error::NoSteadyState { s_max, tail }) => {
                assert_eq!(s_max, 1.0);
                assert!(!tail.is_empty());
                assert!(tail.iter().all(|r| *r > 1e-10));
            }
            other => panic!("expected NoSteadyState, got {other:?}"),
        }
    }

    #[test]
    fn monotonicity_of_the_reference_profile() {
        let g = Grid::new_1d(256, 32.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let rep = monotonicity_report(&field).unwrap();
        assert!(rep.nonincreasing_within(0.0));
        assert!(rep.max_drop > 0.0);

        let wiggly = Field::from_fn_1d(g, |x| -x + 0.5 * (3.0 * x).sin()).unwrap();
        let rep = monotonicity_report(&wiggly).unwrap();
        assert!(rep.max_rise > 0.0);
    }

    #[test]
    fn tail_fit_recovers_the_arctan_decay() {
        // |phi(y) - limit| = (2a/pi) atan(1/y): exponent -1 up to the
        // curvature of atan over the window
        let g = Grid::new_1d(2048, 256.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let fit = fit_tail(&field, 10.0, 128.0).unwrap();
        assert!((fit.exponent + 1.0).abs() < 0.01, "exponent {}", fit.exponent);
        assert!(fit.truncation < 1e-14);
        assert!(fit.samples > 100);
    }

    #[test]
    fn tail_fit_refusals() {
        let g = Grid::new_1d(2048, 256.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        // window past 0.8 X
        assert!(matches!(fit_tail(&field, 10.0, 250.0), Err(Error::TailFit(_))));
        // too few nodes
        assert!(matches!(fit_tail(&field, 10.0, 10.5), Err(Error::TailFit(_))));
        // no background, no limits
        let bare = Field::from_fn_1d(g, |x| (-x * x).exp()).unwrap();
        assert!(matches!(fit_tail(&bare, 10.0, 128.0), Err(Error::TailFit(_))));
    }
}
