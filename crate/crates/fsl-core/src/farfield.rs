//! Non-decaying far-field references phi for shock-like data.
//!
//! In 1d the reference is the smoothed step
//!     phi(x) = mu - (2a/pi) atan(x / tau),
//! the half-Laplacian Poisson evolution of the two-value profile
//! mu + a sign(-x) at time tau. All of its derived quantities are closed
//! form; in particular
//!     Lambda phi(x) = -(2a/pi) x / (tau^2 + x^2),
//! which the tests pin against a principal-value quadrature of the singular
//! integral definition of Lambda.
//!
//! In 2d the reference is the Poisson evolution at time tau of a bounded
//! angular profile h(x/|x|), computed by quadrature (the radial integral of
//! the kernel against a ray is closed form, the angular integral is a
//! periodic trapezoid over the tabulated h) and cached to disk.

use std::f64::consts::PI;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;

const TWO_OVER_PI: f64 = 2.0 / PI;

#[derive(Debug, Clone, PartialEq)]
pub enum FarFieldShape {
    /// Two-value 1d profile: h = mu + a for x < 0, mu - a for x > 0.
    /// a > 0 is shock-like, a < 0 rarefaction-like.
    Step { a: f64, mu: f64 },
    /// 2d angular profile h(theta) tabulated uniformly on [0, 2 pi).
    Angular { h: Arc<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldProfile {
    shape: FarFieldShape,
    tau: f64,
}

impl FarFieldProfile {
    pub fn step(a: f64, mu: f64, tau: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("jump amplitude a must be nonzero finite, got {a}")));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("reference scale tau must be positive, got {tau}")));
        }
        Ok(FarFieldProfile { shape: FarFieldShape::Step { a, mu }, tau })
    }

    pub fn angular(h: Vec<f64>, tau: f64) -> Result<Self> {
        if h.len() < 4 || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "angular table needs at least 4 finite samples".into(),
            ));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("reference scale tau must be positive, got {tau}")));
        }
        Ok(FarFieldProfile { shape: FarFieldShape::Angular { h: Arc::new(h) }, tau })
    }

    pub fn shape(&self) -> &FarFieldShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            FarFieldShape::Step { .. } => 1,
            FarFieldShape::Angular { .. } => 2,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        FarFieldProfile { shape: self.shape.clone(), tau }
    }

    /// Reference after running the Poisson semigroup for time dt.
    pub fn advanced(&self, dt: f64) -> Self {
        self.with_tau(self.tau + dt)
    }

    /// Reference for the dilated field x -> phi(lambda x).
    pub fn dilated(&self, lambda: f64) -> Self {
        self.with_tau(self.tau / lambda)
    }

    pub fn step_params(&self) -> Option<(f64, f64)> {
        match self.shape {
            FarFieldShape::Step { a, mu } => Some((a, mu)),
            _ => None,
        }
    }

    /// Far-field limits (x -> -inf, x -> +inf) in 1d.
    pub fn limits_1d(&self) -> Result<(f64, f64)> {
        match self.shape {
            FarFieldShape::Step { a, mu } => Ok((mu + a, mu - a)),
            _ => Err(Error::Dimension { required: 1, actual: 2 }),
        }
    }

    /// Angular far-field value h(x/|x|); sign-based in 1d, table lookup in 2d.
    pub fn far_value(&self, x1: f64, x2: f64) -> f64 {
        match &self.shape {
            FarFieldShape::Step { a, mu } => {
                if x1 < 0.0 {
                    mu + a
                } else if x1 > 0.0 {
                    mu - a
                } else {
                    *mu
                }
            }
            FarFieldShape::Angular { h } => {
                let theta = x2.atan2(x1).rem_euclid(2.0 * PI);
                let m = h.len();
                let s = theta / (2.0 * PI) * m as f64;
                let i = (s.floor() as usize) % m;
                let frac = s - s.floor();
                h[i] * (1.0 - frac) + h[(i + 1) % m] * frac
            }
        }
    }

    pub fn phi_1d(&self, x: f64) -> f64 {
        match self.shape {
            FarFieldShape::Step { a, mu } => mu - TWO_OVER_PI * a * (x / self.tau).atan(),
            _ => f64::NAN,
        }
    }

    pub fn phi_prime_1d(&self, x: f64) -> f64 {
        match self.shape {
            FarFieldShape::Step { a, .. } => {
                -TWO_OVER_PI * a * self.tau / (self.tau * self.tau + x * x)
            }
            _ => f64::NAN,
        }
    }

    pub fn phi_second_1d(&self, x: f64) -> f64 {
        match self.shape {
            FarFieldShape::Step { a, .. } => {
                let d = self.tau * self.tau + x * x;
                TWO_OVER_PI * a * 2.0 * self.tau * x / (d * d)
            }
            _ => f64::NAN,
        }
    }

    /// Closed form for Lambda phi in 1d; see the module notes.
    pub fn lambda_phi_1d(&self, x: f64) -> f64 {
        match self.shape {
            FarFieldShape::Step { a, .. } => -TWO_OVER_PI * a * x / (self.tau * self.tau + x * x),
            _ => f64::NAN,
        }
    }

    /// Reference samples on a grid. Analytic in 1d; in 2d a quadrature
    /// result cached on disk keyed by (h, tau, grid).
    pub fn reference_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        if grid.dim() != self.dim() {
            return Err(Error::Dimension { required: self.dim(), actual: grid.dim() });
        }
        match &self.shape {
            FarFieldShape::Step { .. } => {
                Ok(grid.axis_coords().map(|x| self.phi_1d(x)).collect())
            }
            FarFieldShape::Angular { h } => {
                if let Some(cached) = cache_read(&self.cache_key(grid)) {
                    if cached.len() == grid.len() {
                        return Ok(cached);
                    }
                }
                let values = angular_reference(h, self.tau, grid);
                cache_write(&self.cache_key(grid), &values);
                Ok(values)
            }
        }
    }

    /// Samples of Lambda phi on a grid. Closed form in 1d; in 2d the
    /// centered tau-derivative of the kernel flow, Lambda phi = -d phi/d tau.
    pub fn lambda_phi_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        if grid.dim() != self.dim() {
            return Err(Error::Dimension { required: self.dim(), actual: grid.dim() });
        }
        match &self.shape {
            FarFieldShape::Step { .. } => {
                Ok(grid.axis_coords().map(|x| self.lambda_phi_1d(x)).collect())
            }
            FarFieldShape::Angular { h } => {
                let dt = 1e-4 * self.tau;
                let lo = angular_reference(h, self.tau - dt, grid);
                let hi = angular_reference(h, self.tau + dt, grid);
                Ok(lo.iter().zip(&hi).map(|(l, u)| (l - u) / (2.0 * dt)).collect())
            }
        }
    }

    /// Total variation of phi on the two tails outside [lo, hi] (1d).
    /// Exact for the monotone step reference.
    pub fn tail_variation_1d(&self, lo_value: f64, hi_value: f64) -> Result<f64> {
        let (left, right) = self.limits_1d()?;
        Ok((left - lo_value).abs() + (hi_value - right).abs())
    }

    /// Bound on |phi| everywhere: the reference is a kernel average of its
    /// far-field values, so the bound on those values bounds phi.
    pub fn amplitude_bound(&self) -> f64 {
        match &self.shape {
            FarFieldShape::Step { a, mu } => mu.abs() + a.abs(),
            FarFieldShape::Angular { h } => h.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// Range containing every value of phi, again by the kernel average.
    pub fn value_range(&self) -> (f64, f64) {
        match &self.shape {
            FarFieldShape::Step { a, mu } => (mu - a.abs(), mu + a.abs()),
            FarFieldShape::Angular { h } => h.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &v| (lo.min(v), hi.max(v)),
            ),
        }
    }

    /// Point value of the 2d reference by the ray-integral quadrature.
    pub fn phi_2d_point(&self, x1: f64, x2: f64) -> Result<f64> {
        match &self.shape {
            FarFieldShape::Angular { h } => {
                Ok(angular_point(h, self.tau, x1, x2))
            }
            _ => Err(Error::Dimension { required: 2, actual: 1 }),
        }
    }

    fn cache_key(&self, grid: &Grid) -> String {
        let mut hasher = Sha256::new();
        if let FarFieldShape::Angular { h } = &self.shape {
            for v in h.iter() {
                hasher.update(v.to_le_bytes());
            }
        }
        hasher.update(self.tau.to_le_bytes());
        hasher.update((grid.dim() as u64).to_le_bytes());
        hasher.update((grid.points() as u64).to_le_bytes());
        hasher.update(grid.half_width().to_le_bytes());
        let digest = hasher.finalize();
        digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }
}

/// Poisson evolution of the angular profile at time tau on a 2d grid.
///
/// For a ray direction e(theta), integrating the 2d kernel along the ray
/// r -> x - r e(theta) has the closed form
///     J(x, theta) = 1/s + (b/d^2)(1 + b/s),
/// with b = x . e, s^2 = |x|^2 + tau^2, d^2 = s^2 - b^2, so that
///     phi(x) = (tau / 2 pi) Int h(theta) J(x, theta) dtheta.
/// The angular integral is a periodic trapezoid over an M-point refinement
/// of the table; the integrand is analytic in a strip of width ~ tau/|x|,
/// so M grows with |x|/tau.
fn angular_reference(h: &[f64], tau: f64, grid: &Grid) -> Vec<f64> {
    let np = grid.points();
    let rmax = grid.half_width() * std::f64::consts::SQRT_2;
    let mut m = ((16.0 * rmax / tau).ceil() as usize).max(512).next_power_of_two();
    m = m.min(16384);

    // refine the h table to m points by periodic linear interpolation
    let hm: Vec<f64> = (0..m)
        .map(|k| {
            let s = k as f64 / m as f64 * h.len() as f64;
            let i = (s.floor() as usize) % h.len();
            let frac = s - s.floor();
            h[i] * (1.0 - frac) + h[(i + 1) % h.len()] * frac
        })
        .collect();
    let dirs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / m as f64;
            (th.cos(), th.sin())
        })
        .collect();

    let mut out = vec![0.0; grid.len()];
    let weight = tau / (2.0 * PI) * (2.0 * PI / m as f64);
    for row in 0..np {
        let x2 = grid.coord(row);
        for col in 0..np {
            let x1 = grid.coord(col);
            let s2 = x1 * x1 + x2 * x2 + tau * tau;
            let s = s2.sqrt();
            let mut acc = 0.0;
            for k in 0..m {
                let b = x1 * dirs[k].0 + x2 * dirs[k].1;
                let d2 = s2 - b * b;
                let j = 1.0 / s + b / d2 * (1.0 + b / s);
                acc += hm[k] * j;
            }
            out[row * np + col] = weight * acc;
        }
    }
    out
}

/// Single-point version of `angular_reference`.
fn angular_point(h: &[f64], tau: f64, x1: f64, x2: f64) -> f64 {
    let r = x1.hypot(x2);
    let mut m = ((16.0 * r / tau).ceil() as usize).max(512).next_power_of_two();
    m = m.min(16384);
    let s2 = r * r + tau * tau;
    let s = s2.sqrt();
    let mut acc = 0.0;
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        let sh = k as f64 / m as f64 * h.len() as f64;
        let i = (sh.floor() as usize) % h.len();
        let frac = sh - sh.floor();
        let hv = h[i] * (1.0 - frac) + h[(i + 1) % h.len()] * frac;
        let b = x1 * th.cos() + x2 * th.sin();
        let d2 = s2 - b * b;
        let j = 1.0 / s + b / d2 * (1.0 + b / s);
        acc += hv * j;
    }
    tau / (2.0 * PI) * (2.0 * PI / m as f64) * acc
}

fn cache_dir() -> std::path::PathBuf {
    std::env::var_os("FSL_CACHE_DIR")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("fsl-cache"))
}

fn cache_read(key: &str) -> Option<Vec<f64>> {
    let path = cache_dir().join(format!("ref-{key}.bin"));
    let bytes = std::fs::read(path).ok()?;
    if bytes.len() % 8 != 0 {
        return None;
    }
    Some(
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    )
}

fn cache_write(key: &str, values: &[f64]) {
    let dir = cache_dir();
    if std::fs::create_dir_all(&dir).is_err() {
        return;
    }
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let tmp = dir.join(format!("ref-{key}.tmp"));
    if std::fs::write(&tmp, &bytes).is_ok() {
        let _ = std::fs::rename(tmp, dir.join(format!("ref-{key}.bin")));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    #[test]
    fn step_values() {
        let p = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        assert_eq!(p.phi_1d(0.0), 0.0);
        assert!((p.phi_1d(1.0) + 0.5).abs() < 1e-15);
        assert!((p.phi_1d(-1.0) - 0.5).abs() < 1e-15);
        let (l, r) = p.limits_1d().unwrap();
        assert_eq!((l, r), (1.0, -1.0));
        assert!((p.lambda_phi_1d(1.0) + 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(FarFieldProfile::step(0.0, 0.0, 1.0).is_err());
        assert!(FarFieldProfile::step(1.0, 0.0, 0.0).is_err());
        assert!(FarFieldProfile::step(1.0, 0.0, -2.0).is_err());
    }

    /// Principal-value oracle for Lambda in 1d:
    /// Lambda g(x) = (1/pi) Int_0^inf (2 g(x) - g(x+z) - g(x-z)) / z^2 dz.
    fn lambda_pv(g: impl Fn(f64) -> f64, x: f64) -> f64 {
        let (v, _) = quadrature::integrate(
            |theta: f64| {
                let z = theta.tan();
                if z <= 0.0 {
                    return 0.0;
                }
                let sec2 = 1.0 / (theta.cos() * theta.cos());
                (2.0 * g(x) - g(x + z) - g(x - z)) / (z * z) * sec2
            },
            1e-12,
            std::f64::consts::FRAC_PI_2 - 1e-12,
            1e-11,
        );
        v / PI
    }

    #[test]
    fn lambda_phi_matches_singular_integral() {
        // Pins the closed form -(2a/pi) x/(tau^2+x^2) against the
        // principal-value definition of the half Laplacian.
        for (a, mu, tau) in [(1.0, 0.0, 1.0), (0.7, 0.3, 2.5), (-1.2, -0.1, 0.5)] {
            let p = FarFieldProfile::step(a, mu, tau).unwrap();
            for x in [0.0, 0.5, -0.5, 1.0, 3.7, -10.0] {
                let oracle = lambda_pv(|y| p.phi_1d(y), x);
                let closed = p.lambda_phi_1d(x);
                assert!(
                    (oracle - closed).abs() < 1e-8,
                    "a={a} tau={tau} x={x}: oracle {oracle} vs closed {closed}"
                );
            }
        }
    }

    #[test]
    fn poisson_flow_consistency() {
        // d phi / d tau = -Lambda phi: the reference is a kernel evolution.
        let p = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let dt = 1e-6;
        for x in [0.0, 0.3, -1.7, 8.0] {
            let dphi = (p.advanced(dt).phi_1d(x) - p.phi_1d(x)) / dt;
            assert!((dphi + p.lambda_phi_1d(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn dilation_rescales_tau() {
        let p = FarFieldProfile::step(1.0, 0.0, 2.0).unwrap();
        let d = p.dilated(4.0);
        for x in [0.1, 1.0, -3.0] {
            assert!((d.phi_1d(x) - p.phi_1d(4.0 * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn tail_variation_closes_to_full_jump() {
        // in-box variation plus analytic tails telescopes to |2a| exactly
        let p = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (x_lo, x_hi) = (-128.5, 128.5 - 0.0627);
        let in_box = p.phi_1d(x_lo) - p.phi_1d(x_hi);
        let tails = p.tail_variation_1d(p.phi_1d(x_lo), p.phi_1d(x_hi)).unwrap();
        assert!((in_box + tails - 2.0).abs() < 1e-14);
    }

    #[test]
    fn angular_constant_profile_is_constant() {
        let p = FarFieldProfile::angular(vec![0.75; 64], 1.0).unwrap();
        let grid = Grid::new_2d(16, 4.0).unwrap();
        let vals = angular_reference(
            match p.shape() {
                FarFieldShape::Angular { h } => h,
                _ => unreachable!(),
            },
            p.tau(),
            &grid,
        );
        for v in vals {
            assert!((v - 0.75).abs() < 1e-9, "constant profile drifted: {v}");
        }
    }

    #[test]
    fn angular_reference_matches_direct_2d_quadrature() {
        // Independent check of the ray-integral closed form: direct 2d
        // quadrature of the kernel against h(z/|z|) = cos(theta). The table
        // is a multiple of the 512 internal ray directions so refinement
        // lands on exact samples, and the radial cutoff at 4000 keeps the
        // cos-weighted tail below 1e-7.
        let m = 2048;
        let h: Vec<f64> = (0..m).map(|k| (2.0 * PI * k as f64 / m as f64).cos()).collect();
        let tau = 1.0;
        let grid = Grid::new_2d(16, 4.0).unwrap();
        let p = FarFieldProfile::angular(h.clone(), tau).unwrap();
        let vals = angular_reference(
            match p.shape() {
                FarFieldShape::Angular { h } => h,
                _ => unreachable!(),
            },
            tau,
            &grid,
        );
        let c2 = 1.0 / (2.0 * PI);
        for (col, row, x1, x2) in [(8usize, 8usize, 0.0, 0.0), (12, 8, 2.0, 0.0), (10, 6, 1.0, -1.0)] {
            // inner radial integral by quadrature, outer angular by trapezoid
            let m_out = 512;
            let mut acc = 0.0;
            for k in 0..m_out {
                let th = 2.0 * PI * k as f64 / m_out as f64;
                let (e1, e2) = (th.cos(), th.sin());
                let (radial, _) = quadrature::integrate(
                    |r: f64| {
                        let dx = x1 - r * e1;
                        let dy = x2 - r * e2;
                        let q = dx * dx + dy * dy + tau * tau;
                        c2 * tau * r / (q * q.sqrt())
                    },
                    0.0,
                    4000.0,
                    1e-11,
                );
                acc += th.cos() * radial;
            }
            let direct = acc * 2.0 * PI / m_out as f64;
            let fast = vals[grid.index_2d(row, col)];
            assert!(
                (direct - fast).abs() < 2e-6,
                "at ({x1},{x2}): direct {direct} vs ray form {fast}"
            );
        }
    }
}
