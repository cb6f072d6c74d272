//! Time integration: physical-frame and similarity-frame solvers for the
//! conservation law with critical dissipation, plus a linear continuity
//! solver driven by a prescribed advection coefficient.
//!
//! All solvers use Strang splitting with the dissipative part applied
//! exactly as a Fourier multiplier on the deviation and the background
//! advanced by its analytic flow, so the splitting error sits entirely in
//! the convection coupling.

mod convection;
mod linear;
mod nonlinear;
mod similarity;

pub use convection::{ConvectionSweep, Ghosts, Scheme};
pub use linear::{evolve_linear_continuity, AdvectionField};
pub use nonlinear::{evolve_nonlinear, step_nonlinear};
pub use similarity::{evolve_similarity, SimilarityState};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    /// Courant number in (0, 1]; time steps obey
    /// dt <= cfl * dx / max(1, wave speed).
    pub cfl: f64,
    /// Extra exact viscous factor exp(-viscosity t xi^2) in the dissipative
    /// substep; zero for the critical equation itself.
    pub viscosity: f64,
    /// Hard cap on steps per call, against runaway loops.
    pub max_steps: usize,
    /// Record diagnostics every this many steps; 0 records only endpoints.
    pub diagnostics_cadence: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { cfl: 0.4, viscosity: 0.0, max_steps: 4_000_000, diagnostics_cadence: 0 }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("CFL out of (0, 1]: {}", self.cfl)));
        }
        if !(self.viscosity >= 0.0) || !self.viscosity.is_finite() {
            return Err(Error::Config(format!("viscosity must be finite nonnegative: {}", self.viscosity)));
        }
        Ok(())
    }
}

/// One diagnostics sample along a run.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub sup_norm: f64,
    /// Total variation (1d); NaN in 2d.
    pub tv: f64,
    /// Integral of the deviation from the background.
    pub mass: f64,
    pub max_grad: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticsRow>,
}

impl Trajectory {
    pub fn record(&mut self, field: &Field, dt: f64) -> Result<()> {
        let tv = if field.grid().dim() == 1 {
            crate::norms::tv_norm(field)?
        } else {
            f64::NAN
        };
        self.rows.push(DiagnosticsRow {
            t: field.time(),
            sup_norm: field.sup_norm(),
            tv,
            mass: field.deviation_mass()?,
            max_grad: crate::calculus::max_gradient(field)?,
            dt,
        });
        Ok(())
    }

    pub fn extend(&mut self, other: Trajectory) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "t,sup_norm,tv,mass,max_grad,dt")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.t, r.sup_norm, r.tv, r.mass, r.max_grad, r.dt
            )?;
        }
        Ok(())
    }
}

/// A finished integration: the final state, its diagnostics, step count.
#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub field: Field,
    pub diagnostics: Trajectory,
    pub steps: usize,
}

pub(crate) fn nan_guard(values: &[f64], step: usize, t: f64) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        Err(Error::Nan { step, t })
    } else {
        Ok(())
    }
}
