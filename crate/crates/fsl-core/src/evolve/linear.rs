//! The linear continuity problem  d_t u + d_x (g u) + Lambda u = 0  for a
//! prescribed coefficient g(x, t), 1d, decaying data.
//!
//! Strang split like the nonlinear solver: exact dissipative halves around
//! a donor-cell upwind transport step. Donor cell is monotone and
//! conservative, so nonnegative data stays nonnegative and the column mass
//! moves only through the boundary, where the data is assumed negligible.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::spectral;

use super::{nan_guard, EvolveOutput, SchemeConfig, Trajectory};

/// Advection coefficient g(x, t) on the solver's grid.
#[derive(Debug, Clone)]
pub enum AdvectionField {
    Zero,
    /// Fixed spatial profile.
    Constant(Vec<f64>),
    /// Piecewise-constant in time: frame k applies from times[k] on.
    Recorded { times: Vec<f64>, frames: Vec<Vec<f64>> },
}

impl AdvectionField {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != 1 {
            return Err(Error::Dimension { required: 1, actual: grid.dim() });
        }
        let ok = match self {
            AdvectionField::Zero => true,
            AdvectionField::Constant(g) => g.len() == grid.len(),
            AdvectionField::Recorded { times, frames } => {
                !frames.is_empty()
                    && times.len() == frames.len()
                    && frames.iter().all(|f| f.len() == grid.len())
                    && times.windows(2).all(|w| w[1] > w[0])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("advection frames do not match the grid".into()))
        }
    }

    fn at(&self, t: f64, n: usize) -> Cow<'_, [f64]> {
        match self {
            AdvectionField::Zero => Cow::Owned(vec![0.0; n]),
            AdvectionField::Constant(g) => Cow::Borrowed(g.as_slice()),
            AdvectionField::Recorded { times, frames } => {
                let k = times.partition_point(|&tk| tk <= t).saturating_sub(1);
                Cow::Borrowed(frames[k].as_slice())
            }
        }
    }

    /// sup |g| over all frames.
    pub fn speed_bound(&self) -> f64 {
        let over = |g: &Vec<f64>| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match self {
            AdvectionField::Zero => 0.0,
            AdvectionField::Constant(g) => over(g),
            AdvectionField::Recorded { frames, .. } => {
                frames.iter().map(over).fold(0.0, f64::max)
            }
        }
    }
}

/// Donor-cell divergence -d_x(g u) with zero inflow ghosts.
fn transport_rhs(u: &[f64], g: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let face_flux = |i: usize| -> f64 {
        // interface between cells i-1 and i; ghost value 0 outside
        let gl = if i == 0 { g[0] } else { g[i - 1] };
        let gr = if i == n { g[n - 1] } else { g[i] };
        let gf = 0.5 * (gl + gr);
        let up = if gf >= 0.0 {
            if i == 0 { 0.0 } else { u[i - 1] }
        } else if i == n {
            0.0
        } else {
            u[i]
        };
        gf * up
    };
    let mut f_prev = face_flux(0);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f_next = face_flux(i + 1);
        out.push(-(f_next - f_prev) / dx);
        f_prev = f_next;
    }
    out
}

pub fn evolve_linear_continuity(
    field: &Field,
    advection: &AdvectionField,
    t_target: f64,
    cfg: &SchemeConfig,
) -> Result<EvolveOutput> {
    cfg.validate()?;
    let grid = *field.grid();
    advection.validate(&grid)?;
    if field.background().is_some() {
        return Err(Error::InvalidArgument(
            "linear continuity solver expects decaying data without a background".into(),
        ));
    }
    if !(t_target >= field.time()) || !t_target.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target time {t_target} behind state time {}",
            field.time()
        )));
    }
    let n = grid.len();
    let dx = grid.spacing();
    let speed = advection.speed_bound();
    let dt_cfl = cfg.cfl * dx / speed.max(1.0);

    let mut values = field.values().to_vec();
    let mut t = field.time();
    let mut diagnostics = Trajectory::default();
    diagnostics.record(field, 0.0)?;
    let mut steps = 0usize;
    let mut symbol: Option<(f64, Vec<f64>)> = None;
    while t < t_target - 1e-13 * t_target.abs().max(1.0) {
        if steps >= cfg.max_steps {
            return Err(Error::InvalidArgument(format!(
                "step budget {} exhausted at t = {}",
                cfg.max_steps, t
            )));
        }
        let dt = dt_cfl.min(t_target - t);
        let h = 0.5 * dt;
        let rebuild = match &symbol {
            Some((cached, _)) => *cached != h,
            None => true,
        };
        if rebuild {
            symbol = Some((h, spectral::symbol_semigroup(&grid, 1.0, h, cfg.viscosity)));
        }
        let sym = &symbol.as_ref().unwrap().1;

        values = spectral::apply_symbol(&grid, &values, sym);
        // Heun step of the transport part, coefficient sampled per stage
        let g1 = advection.at(t, n);
        let k1 = transport_rhs(&values, &g1, dx);
        let stage: Vec<f64> = values.iter().zip(&k1).map(|(v, k)| v + dt * k).collect();
        let g2 = advection.at(t + dt, n);
        let k2 = transport_rhs(&stage, &g2, dx);
        values = values
            .iter()
            .zip(stage.iter().zip(&k2))
            .map(|(v, (s, k))| 0.5 * v + 0.5 * (s + dt * k))
            .collect();
        values = spectral::apply_symbol(&grid, &values, sym);

        t += dt;
        steps += 1;
        nan_guard(&values, steps, t)?;
        if cfg.diagnostics_cadence > 0 && steps % cfg.diagnostics_cadence == 0 {
            let snap = Field::new(grid, values.clone(), None)?.with_time(t);
            diagnostics.record(&snap, dt)?;
        }
    }
    let out = Field::new(grid, values, None)?.with_time(t);
    if cfg.diagnostics_cadence == 0 || steps % cfg.diagnostics_cadence != 0 {
        diagnostics.record(&out, 0.0)?;
    }
    Ok(EvolveOutput { field: out, diagnostics, steps })
}
