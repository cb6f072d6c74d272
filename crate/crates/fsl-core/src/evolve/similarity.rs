//! Similarity-frame integration. In the variables y = x/t, s = log t the
//! equation becomes
//!     d_s U = y . grad U - div f(U) - Lambda U,
//! and the linear part (everything except the flux term) has the exact
//! solution  U(., s + h) = [P(., lambda - 1) * U(., s)](lambda .) with
//! lambda = e^h: a Fourier multiplier followed by a dilation, both of which
//! are computed spectrally without time-step error. Strang wraps the
//! monotone convection step between two exact linear halves.
//!
//! The background scale obeys tau -> (tau + lambda - 1) / lambda, whose
//! fixed point tau = 1 is reproduced exactly in floating point, so a
//! background started on the fixed point never drifts.

use crate::error::{Error, Result};
use crate::farfield::FarFieldProfile;
use crate::field::Field;
use crate::flux::FluxFunction;
use crate::grid::Grid;
use crate::spectral::{self, UniformEvaluator};

use super::convection::{ConvectionSweep, Ghosts};
use super::{nan_guard, EvolveOutput, SchemeConfig, Trajectory};

/// Deviation, background scale and log-time of a similarity-frame state.
pub struct SimilarityState {
    pub grid: Grid,
    pub deviation: Vec<f64>,
    pub background: Option<FarFieldProfile>,
    pub s: f64,
}

impl SimilarityState {
    pub fn from_field(field: &Field) -> Result<Self> {
        Ok(SimilarityState {
            grid: *field.grid(),
            deviation: field.deviation()?,
            background: field.background().cloned(),
            s: field.time(),
        })
    }

    pub fn to_field(&self) -> Result<Field> {
        let mut values = self.deviation.clone();
        if let Some(bg) = &self.background {
            let phi = bg.reference_values(&self.grid)?;
            for (v, p) in values.iter_mut().zip(&phi) {
                *v += p;
            }
        }
        Ok(Field::new(self.grid, values, self.background.clone())?.with_time(self.s))
    }
}

/// Everything reusable across steps of one fixed width h.
struct Stepper<'a> {
    grid: Grid,
    flux: &'a FluxFunction,
    h: f64,
    lambda_half: f64,
    symbol: Vec<f64>,
    evaluator: Option<UniformEvaluator>, // 1d dilation, built once
    phi_cache: Option<(f64, Vec<f64>)>,
    ghost_cache: Option<(f64, Ghosts)>,
}

impl<'a> Stepper<'a> {
    fn new(grid: Grid, flux: &'a FluxFunction, h: f64) -> Self {
        let lambda_half = (0.5 * h).exp();
        let symbol = spectral::symbol_semigroup(&grid, 1.0, lambda_half - 1.0, 0.0);
        let evaluator = match grid.dim() {
            1 => Some(UniformEvaluator::dilation(&grid, lambda_half)),
            _ => None,
        };
        Stepper { grid, flux, h, lambda_half, symbol, evaluator, phi_cache: None, ghost_cache: None }
    }

    fn phi(&mut self, bg: &FarFieldProfile) -> Result<&[f64]> {
        let refresh = match &self.phi_cache {
            Some((tau, _)) => *tau != bg.tau(),
            None => true,
        };
        if refresh {
            self.phi_cache = Some((bg.tau(), bg.reference_values(&self.grid)?));
        }
        Ok(&self.phi_cache.as_ref().unwrap().1)
    }

    fn ghosts(&mut self, state: &SimilarityState) -> Result<Ghosts> {
        match &state.background {
            None => Ok(match self.grid.dim() {
                1 => Ghosts::zero_gradient_1d(&state.deviation),
                _ => Ghosts::zero_gradient_2d(&state.deviation, self.grid.points()),
            }),
            Some(bg) => {
                let x = self.grid.half_width();
                let dx = self.grid.spacing();
                match self.grid.dim() {
                    1 => Ok(Ghosts::flat_1d(bg.phi_1d(-x - dx), bg.phi_1d(x))),
                    _ => {
                        if let Some((tau, g)) = &self.ghost_cache {
                            if *tau == bg.tau() {
                                return Ok(g.clone());
                            }
                        }
                        let np = self.grid.points();
                        let mut left = Vec::with_capacity(np);
                        let mut right = Vec::with_capacity(np);
                        let mut bottom = Vec::with_capacity(np);
                        let mut top = Vec::with_capacity(np);
                        for i in 0..np {
                            let c = self.grid.coord(i);
                            left.push(bg.phi_2d_point(-x - dx, c)?);
                            right.push(bg.phi_2d_point(x, c)?);
                            bottom.push(bg.phi_2d_point(c, -x - dx)?);
                            top.push(bg.phi_2d_point(c, x)?);
                        }
                        let g = Ghosts { left, right, bottom, top };
                        self.ghost_cache = Some((bg.tau(), g.clone()));
                        Ok(g)
                    }
                }
            }
        }
    }

    /// Exact linear half step: multiplier, dilation, background scale map.
    fn linear_half(&self, state: &mut SimilarityState) {
        let v = spectral::apply_symbol(&self.grid, &state.deviation, &self.symbol);
        state.deviation = match (self.grid.dim(), &self.evaluator) {
            (1, Some(ev)) => ev.eval(&v),
            _ => spectral::dilate_2d(&self.grid, &v, self.lambda_half),
        };
        if let Some(bg) = &state.background {
            let lam = self.lambda_half;
            state.background = Some(bg.with_tau((bg.tau() + (lam - 1.0)) / lam));
        }
    }

    fn convect(&mut self, state: &mut SimilarityState) -> Result<()> {
        if (0..self.flux.dim()).all(|c| matches!(self.flux.component(c), crate::flux::FluxComponent::Zero)) {
            return Ok(());
        }
        let mut total = state.deviation.clone();
        let has_bg = state.background.is_some();
        if let Some(bg) = state.background.clone() {
            let phi = self.phi(&bg)?;
            for (t, p) in total.iter_mut().zip(phi) {
                *t += p;
            }
        }
        let (lo, hi) = range_of(&total, state.background.as_ref());
        let sweep = ConvectionSweep::new(self.flux, lo, hi);
        let ghosts = self.ghosts(state)?;
        let np = match self.grid.dim() {
            1 => None,
            _ => Some(self.grid.points()),
        };
        let new_total = sweep.ssp_rk2(&total, np, &ghosts, self.h, self.grid.spacing());
        state.deviation = if has_bg {
            let bg = state.background.clone().unwrap();
            let phi = self.phi(&bg)?;
            new_total.iter().zip(phi).map(|(t, p)| t - p).collect()
        } else {
            new_total
        };
        Ok(())
    }

    fn step(&mut self, state: &mut SimilarityState) -> Result<()> {
        self.linear_half(state);
        self.convect(state)?;
        self.linear_half(state);
        state.s += self.h;
        Ok(())
    }
}

fn range_of(values: &[f64], background: Option<&FarFieldProfile>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if let Some(bg) = background {
        let (blo, bhi) = bg.value_range();
        lo = lo.min(blo);
        hi = hi.max(bhi);
    }
    (lo, hi)
}

/// Integrate the similarity-frame equation from the field's log-time to
/// s_target. The step width is the CFL limit capped by ds_request and held
/// constant so the dilation operator can be reused; a final partial step
/// lands exactly on s_target.
pub fn evolve_similarity(
    field: &Field,
    flux: &FluxFunction,
    s_target: f64,
    ds_request: f64,
    cfg: &SchemeConfig,
) -> Result<EvolveOutput> {
    cfg.validate()?;
    if flux.dim() != field.grid().dim() {
        return Err(Error::Dimension { required: field.grid().dim(), actual: flux.dim() });
    }
    if !(ds_request > 0.0) || !ds_request.is_finite() {
        return Err(Error::InvalidArgument(format!("similarity step request {ds_request}")));
    }
    if !(s_target >= field.time()) || !s_target.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target log-time {s_target} behind state {}",
            field.time()
        )));
    }
    let mut state = SimilarityState::from_field(field)?;
    let grid = state.grid;

    // the maximum principle keeps states inside the initial range, so one
    // speed bound fixes the step width for the whole run
    let total0: Vec<f64> = {
        let mut t = state.deviation.clone();
        if let Some(bg) = &state.background {
            for (v, p) in t.iter_mut().zip(bg.reference_values(&grid)?) {
                *v += p;
            }
        }
        t
    };
    let (lo, hi) = range_of(&total0, state.background.as_ref());
    let sweep = ConvectionSweep::new(flux, lo, hi);
    let speed = match grid.dim() {
        1 => sweep.max_speed(),
        _ => sweep.speed_sum(),
    };
    let h = ds_request.min(cfg.cfl * grid.spacing() / speed.max(1.0));

    let mut stepper = Stepper::new(grid, flux, h);
    let mut diagnostics = Trajectory::default();
    diagnostics.record(field, 0.0)?;
    let mut steps = 0usize;
    while state.s < s_target - 1e-12 {
        if steps >= cfg.max_steps {
            return Err(Error::InvalidArgument(format!(
                "step budget {} exhausted at s = {}",
                cfg.max_steps, state.s
            )));
        }
        let remaining = s_target - state.s;
        if remaining < stepper.h * (1.0 - 1e-12) {
            stepper = Stepper::new(grid, flux, remaining);
        }
        stepper.step(&mut state)?;
        steps += 1;
        nan_guard(&state.deviation, steps, state.s)?;
        if cfg.diagnostics_cadence > 0 && steps % cfg.diagnostics_cadence == 0 {
            diagnostics.record(&state.to_field()?, stepper.h)?;
        }
    }
    let out = state.to_field()?;
    if cfg.diagnostics_cadence == 0 || steps % cfg.diagnostics_cadence != 0 {
        diagnostics.record(&out, 0.0)?;
    }
    Ok(EvolveOutput { field: out, diagnostics, steps })
}
