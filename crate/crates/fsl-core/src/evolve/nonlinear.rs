//! Physical-frame integration of  d_t u + div f(u) + Lambda u = 0.
//!
//! Strang split: half a step of the dissipative semigroup (exact Fourier
//! multiplier on the deviation, exact scale advance of the background),
//! a full monotone convection step on the total field with background
//! ghost values, then the second dissipative half.

use crate::error::{Error, Result};
use crate::farfield::FarFieldProfile;
use crate::field::Field;
use crate::flux::FluxFunction;
use crate::grid::Grid;
use crate::spectral;

use super::convection::{ConvectionSweep, Ghosts};
use super::{nan_guard, EvolveOutput, SchemeConfig, Trajectory};

struct State {
    grid: Grid,
    values: Vec<f64>,
    background: Option<FarFieldProfile>,
    t: f64,
    // semigroup symbol cached for the repeated half-step width
    symbol: Option<(f64, Vec<f64>)>,
    // 2d background ghost frame cached by tau
    ghost_cache: Option<(f64, Ghosts)>,
}

impl State {
    fn from_field(field: &Field) -> Self {
        State {
            grid: *field.grid(),
            values: field.values().to_vec(),
            background: field.background().cloned(),
            t: field.time(),
            symbol: None,
            ghost_cache: None,
        }
    }

    fn to_field(&self) -> Result<Field> {
        Ok(Field::new(self.grid, self.values.clone(), self.background.clone())?.with_time(self.t))
    }

    fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if let Some(bg) = &self.background {
            let (blo, bhi) = bg.value_range();
            lo = lo.min(blo);
            hi = hi.max(bhi);
        }
        (lo, hi)
    }

    fn dissipate(&mut self, h: f64, viscosity: f64) -> Result<()> {
        if h == 0.0 {
            return Ok(());
        }
        let rebuild = match &self.symbol {
            Some((cached_h, _)) => *cached_h != h,
            None => true,
        };
        if rebuild {
            self.symbol = Some((h, spectral::symbol_semigroup(&self.grid, 1.0, h, viscosity)));
        }
        let symbol = &self.symbol.as_ref().unwrap().1;
        match &self.background {
            None => {
                self.values = spectral::apply_symbol(&self.grid, &self.values, symbol);
            }
            Some(bg) => {
                let phi = bg.reference_values(&self.grid)?;
                let mut v: Vec<f64> =
                    self.values.iter().zip(&phi).map(|(u, p)| u - p).collect();
                v = spectral::apply_symbol(&self.grid, &v, symbol);
                let advanced = bg.advanced(h);
                let phi_new = advanced.reference_values(&self.grid)?;
                self.values = v.iter().zip(&phi_new).map(|(v, p)| v + p).collect();
                self.background = Some(advanced);
            }
        }
        Ok(())
    }

    fn ghosts(&mut self) -> Result<Ghosts> {
        match &self.background {
            None => Ok(match self.grid.dim() {
                1 => Ghosts::zero_gradient_1d(&self.values),
                _ => Ghosts::zero_gradient_2d(&self.values, self.grid.points()),
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
                        let coord = |i: usize| self.grid.coord(i);
                        let mut left = Vec::with_capacity(np);
                        let mut right = Vec::with_capacity(np);
                        let mut bottom = Vec::with_capacity(np);
                        let mut top = Vec::with_capacity(np);
                        for i in 0..np {
                            left.push(bg.phi_2d_point(-x - dx, coord(i))?);
                            right.push(bg.phi_2d_point(x, coord(i))?);
                            bottom.push(bg.phi_2d_point(coord(i), -x - dx)?);
                            top.push(bg.phi_2d_point(coord(i), x)?);
                        }
                        let g = Ghosts { left, right, bottom, top };
                        self.ghost_cache = Some((bg.tau(), g.clone()));
                        Ok(g)
                    }
                }
            }
        }
    }

    fn convect(&mut self, flux: &FluxFunction, dt: f64) -> Result<()> {
        let (lo, hi) = self.value_range();
        let sweep = ConvectionSweep::new(flux, lo, hi);
        let ghosts = self.ghosts()?;
        let np = match self.grid.dim() {
            1 => None,
            _ => Some(self.grid.points()),
        };
        self.values = sweep.ssp_rk2(&self.values, np, &ghosts, dt, self.grid.spacing());
        Ok(())
    }
}

fn check_dims(field: &Field, flux: &FluxFunction) -> Result<()> {
    if flux.dim() != field.grid().dim() {
        return Err(Error::Dimension { required: field.grid().dim(), actual: flux.dim() });
    }
    Ok(())
}

/// Stable step width at the current state.
fn cfl_limit(state: &State, flux: &FluxFunction, cfg: &SchemeConfig) -> f64 {
    let (lo, hi) = state.value_range();
    let sweep = ConvectionSweep::new(flux, lo, hi);
    let speed = match state.grid.dim() {
        1 => sweep.max_speed(),
        _ => sweep.speed_sum(),
    };
    cfg.cfl * state.grid.spacing() / speed.max(1.0)
}

/// One Strang step of width dt. Errors when dt violates the CFL condition.
pub fn step_nonlinear(field: &Field, flux: &FluxFunction, dt: f64, cfg: &SchemeConfig) -> Result<Field> {
    cfg.validate()?;
    check_dims(field, flux)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step width {dt}")));
    }
    let mut state = State::from_field(field);
    let limit = cfl_limit(&state, flux, cfg);
    if dt > limit * (1.0 + 1e-9) {
        return Err(Error::Cfl { dt, limit });
    }
    state.dissipate(0.5 * dt, cfg.viscosity)?;
    state.convect(flux, dt)?;
    state.dissipate(0.5 * dt, cfg.viscosity)?;
    state.t += dt;
    nan_guard(&state.values, 1, state.t)?;
    state.to_field()
}

/// Integrate to t_target with automatic CFL steps.
pub fn evolve_nonlinear(
    field: &Field,
    flux: &FluxFunction,
    t_target: f64,
    cfg: &SchemeConfig,
) -> Result<EvolveOutput> {
    cfg.validate()?;
    check_dims(field, flux)?;
    if !(t_target >= field.time()) || !t_target.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target time {t_target} behind state time {}",
            field.time()
        )));
    }
    let mut state = State::from_field(field);
    let mut diagnostics = Trajectory::default();
    diagnostics.record(field, 0.0)?;
    let mut steps = 0usize;
    while state.t < t_target - 1e-13 * t_target.abs().max(1.0) {
        if steps >= cfg.max_steps {
            return Err(Error::InvalidArgument(format!(
                "step budget {} exhausted at t = {}",
                cfg.max_steps, state.t
            )));
        }
        let dt = cfl_limit(&state, flux, cfg).min(t_target - state.t);
        state.dissipate(0.5 * dt, cfg.viscosity)?;
        state.convect(flux, dt)?;
        state.dissipate(0.5 * dt, cfg.viscosity)?;
        state.t += dt;
        steps += 1;
        nan_guard(&state.values, steps, state.t)?;
        if cfg.diagnostics_cadence > 0 && steps % cfg.diagnostics_cadence == 0 {
            diagnostics.record(&state.to_field()?, dt)?;
        }
    }
    let field = state.to_field()?;
    if cfg.diagnostics_cadence == 0 || steps % cfg.diagnostics_cadence != 0 {
        diagnostics.record(&field, 0.0)?;
    }
    Ok(EvolveOutput { field, diagnostics, steps })
}
