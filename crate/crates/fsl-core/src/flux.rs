//! Convective flux f: R -> R^n with Lipschitz bookkeeping.
//!
//! Presets cover the cases exercised by the experiments: zero flux, Burgers
//! u^2/2, polynomial components, and the kinked fluxes |u| and u|u|/2 used to
//! probe merely Lipschitz nonlinearities.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    Smooth,
    C1Alpha,
    Lipschitz,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FluxComponent {
    Zero,
    Burgers,
    Polynomial(Vec<f64>),
    /// f(u) = |u|, Lipschitz with a kink at 0.
    Abs,
    /// f(u) = u|u|/2, C^1 with Lipschitz derivative |u|.
    AbsQuadratic,
}

impl FluxComponent {
    fn eval(&self, u: f64) -> f64 {
        match self {
            FluxComponent::Zero => 0.0,
            FluxComponent::Burgers => 0.5 * u * u,
            FluxComponent::Polynomial(c) => horner(c, u),
            FluxComponent::Abs => u.abs(),
            FluxComponent::AbsQuadratic => 0.5 * u * u.abs(),
        }
    }

    fn deriv(&self, u: f64) -> f64 {
        match self {
            FluxComponent::Zero => 0.0,
            FluxComponent::Burgers => u,
            FluxComponent::Polynomial(c) => horner_deriv(c, u),
            FluxComponent::Abs => {
                if u > 0.0 {
                    1.0
                } else if u < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            FluxComponent::AbsQuadratic => u.abs(),
        }
    }

    /// Upper bound for sup |f'| over [lo, hi], never below the true sup.
    fn deriv_bound(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        match self {
            FluxComponent::Zero => 0.0,
            FluxComponent::Burgers => lo.abs().max(hi.abs()),
            FluxComponent::Abs => 1.0,
            FluxComponent::AbsQuadratic => lo.abs().max(hi.abs()),
            FluxComponent::Polynomial(c) => {
                // Sampled max plus a curvature pad from the coefficient bound
                // sup |p''| <= sum k(k-1)|c_k| r^(k-2), r = max |u|.
                let r = lo.abs().max(hi.abs());
                let mut b2 = 0.0;
                for (k, &ck) in c.iter().enumerate().skip(2) {
                    b2 += (k * (k - 1)) as f64 * ck.abs() * r.powi(k as i32 - 2);
                }
                let samples = 8192;
                let dx = (hi - lo) / samples as f64;
                let mut max = 0.0f64;
                for i in 0..=samples {
                    max = max.max(horner_deriv(c, lo + i as f64 * dx).abs());
                }
                max + 0.5 * dx * b2
            }
        }
    }

    fn smoothness(&self) -> Smoothness {
        match self {
            FluxComponent::Zero | FluxComponent::Burgers | FluxComponent::Polynomial(_) => {
                Smoothness::Smooth
            }
            FluxComponent::AbsQuadratic => Smoothness::C1Alpha,
            FluxComponent::Abs => Smoothness::Lipschitz,
        }
    }
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
}

fn horner_deriv(c: &[f64], u: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &ck) in c.iter().enumerate().skip(1).rev() {
        acc = acc * u + k as f64 * ck;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxFunction {
    components: Vec<FluxComponent>,
}

impl FluxFunction {
    pub fn new(components: Vec<FluxComponent>) -> Result<Self> {
        if components.is_empty() || components.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "flux must have 1 or 2 components, got {}",
                components.len()
            )));
        }
        Ok(FluxFunction { components })
    }

    pub fn zero(dim: usize) -> Self {
        FluxFunction { components: vec![FluxComponent::Zero; dim.max(1)] }
    }

    pub fn burgers() -> Self {
        FluxFunction { components: vec![FluxComponent::Burgers] }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        FluxFunction { components: vec![FluxComponent::Polynomial(coeffs)] }
    }

    pub fn abs() -> Self {
        FluxFunction { components: vec![FluxComponent::Abs] }
    }

    pub fn abs_quadratic() -> Self {
        FluxFunction { components: vec![FluxComponent::AbsQuadratic] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &FluxComponent {
        &self.components[c]
    }

    pub fn eval(&self, c: usize, u: f64) -> f64 {
        self.components[c].eval(u)
    }

    pub fn deriv(&self, c: usize, u: f64) -> f64 {
        self.components[c].deriv(u)
    }

    /// Lipschitz constant of f on [-m, m], an upper bound for sup |f'|.
    pub fn lipschitz_on(&self, m: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.deriv_bound(-m.abs(), m.abs()))
            .fold(0.0, f64::max)
    }

    /// Upper bound for sup |f_c'| over [lo, hi] (local wave speed).
    pub fn max_speed_on(&self, c: usize, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        self.components[c].deriv_bound(lo, hi)
    }

    /// Worst smoothness class over components.
    pub fn smoothness(&self) -> Smoothness {
        self.components
            .iter()
            .map(|c| c.smoothness())
            .max()
            .unwrap_or(Smoothness::Smooth)
    }

    /// True when every component is convex on [-m, m] (up to sampling).
    pub fn is_convex_on(&self, m: f64) -> bool {
        self.components.iter().all(|c| match c {
            FluxComponent::Zero | FluxComponent::Burgers => true,
            FluxComponent::Abs => true,
            FluxComponent::AbsQuadratic => false,
            FluxComponent::Polynomial(_) => {
                let samples = 1024;
                let dx = 2.0 * m / samples as f64;
                // convex iff f' nondecreasing
                let mut prev = c.deriv(-m);
                for i in 1..=samples {
                    let d = c.deriv(-m + i as f64 * dx);
                    if d < prev - 1e-12 {
                        return false;
                    }
                    prev = d;
                }
                true
            }
        })
    }

    /// Argmin of a convex component inside [lo, hi], if f' changes sign there.
    pub fn sonic_point(&self, c: usize, lo: f64, hi: f64) -> Option<f64> {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let dl = self.deriv(c, lo);
        let dh = self.deriv(c, hi);
        if dl >= 0.0 || dh <= 0.0 {
            return None;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if self.deriv(c, mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}
