//! The kernel of the half-Laplacian semigroup and slow reference routes to
//! it: direct quadrature convolution and the singular-integral form of
//! Lambda. The fast spectral paths elsewhere are tested against these.
//!
//! P(x, t) = c_n t / (t^2 + |x|^2)^{(n+1)/2}, c_1 = 1/pi, c_2 = 1/(2 pi).
//!
//! On a period-2X torus the periodization sum collapses to
//!     P_per(x, t) = (1 / 2X) sinh(pi t / X) / (cosh(pi t / X) - cos(pi x / X)),
//! the disk Poisson kernel with r = exp(-pi t / X). Convolving against it by
//! quadrature reproduces exactly what the Fourier multiplier computes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

#[derive(Debug, Clone, Copy)]
pub struct PoissonKernel {
    dim: usize,
}

impl PoissonKernel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 1 || dim == 2 {
            Ok(PoissonKernel { dim })
        } else {
            Err(Error::Dimension { required: 2, actual: dim })
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// c_n, fixed by unit mass.
    pub fn normalization(&self) -> f64 {
        match self.dim {
            1 => 1.0 / PI,
            _ => 1.0 / (2.0 * PI),
        }
    }

    pub fn eval_radial(&self, r: f64, t: f64) -> f64 {
        let q = t * t + r * r;
        match self.dim {
            1 => self.normalization() * t / q,
            _ => self.normalization() * t / (q * q.sqrt()),
        }
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let r = match self.dim {
            1 => x[0].abs(),
            _ => x[0].hypot(x[1]),
        };
        self.eval_radial(r, t)
    }

    /// Numeric mass, for pinning the normalization.
    pub fn mass_quadrature(&self, t: f64, tol: f64) -> f64 {
        match self.dim {
            1 => quadrature::integrate_line(|x| self.eval_radial(x.abs(), t), tol).0,
            _ => {
                // 2 pi Int_0^inf P(r) r dr, via r = tan(theta)
                let (v, _) = quadrature::integrate(
                    |theta: f64| {
                        let r = theta.tan();
                        let sec2 = 1.0 + r * r;
                        self.eval_radial(r, t) * r * sec2
                    },
                    0.0,
                    PI / 2.0 - 1e-12,
                    tol,
                );
                2.0 * PI * v
            }
        }
    }
}

/// Periodized 1d kernel on a period-2X torus, closed form.
pub fn periodized_kernel_1d(x: f64, t: f64, half_width: f64) -> f64 {
    let q = PI * t / half_width;
    let p = PI * x / half_width;
    (0.5 / half_width) * q.sinh() / (q.cosh() - p.cos())
}

/// Quadrature convolution of a periodic function with the periodized kernel,
/// the slow route the spectral semigroup must agree with.
pub fn convolve_periodic_1d(
    g: impl Fn(f64) -> f64,
    t: f64,
    half_width: f64,
    x: f64,
    tol: f64,
) -> f64 {
    let (v, _) = quadrature::integrate(
        |y: f64| periodized_kernel_1d(x - y, t, half_width) * g(y),
        x - half_width,
        x + half_width,
        tol,
    );
    v
}

/// Whole-line quadrature convolution with the free kernel.
pub fn convolve_line_1d(g: impl Fn(f64) -> f64, t: f64, x: f64, tol: f64) -> f64 {
    let kernel = PoissonKernel::new(1).unwrap();
    quadrature::integrate_line(|y| kernel.eval_radial((x - y).abs(), t) * g(y), tol).0
}

/// Singular-integral form of the half Laplacian in 1d,
///     Lambda g(x) = (1/pi) Int_0^inf (2 g(x) - g(x+z) - g(x-z)) / z^2 dz,
/// for C^4 functions bounded at infinity.
///
/// Three regimes. Below delta the integrand is within O(delta^2) of its
/// limit -g''(x), so that slab contributes its frozen value; this keeps the
/// rounded second difference, whose noise grows like eps / z^2, away from
/// the quadrature error estimator entirely. The middle runs in dyadic
/// pieces so each local tolerance is not diluted by the full integration
/// length. Past the cutoff Z the 2 g(x) piece integrates in closed form and
/// g(x +- z) contributes its average over [Z, 2Z]; window averaging makes
/// the truncation error O(Z^-2) both for tails approaching limits like 1/z
/// and for bounded oscillation.
pub fn lambda_singular_1d(g: impl Fn(f64) -> f64, x: f64, tol: f64) -> f64 {
    let delta = 1e-3;
    let z_cut = 4096.0;
    let gx = g(x);
    let second = |z: f64| (2.0 * gx - g(x + z) - g(x - z)) / (z * z);

    let mut acc = second(delta) * delta;
    let pieces = (z_cut / delta).log2().ceil();
    let tol_piece = tol / (pieces + 2.0);
    let mut lo = delta;
    while lo < z_cut {
        let hi = (2.0 * lo).min(z_cut);
        acc += quadrature::integrate(|z| second(z), lo, hi, tol_piece).0;
        lo = hi;
    }

    let (wp, _) = quadrature::integrate(|z: f64| g(x + z), z_cut, 2.0 * z_cut, tol_piece * z_cut);
    let (wm, _) = quadrature::integrate(|z: f64| g(x - z), z_cut, 2.0 * z_cut, tol_piece * z_cut);
    acc += (2.0 * gx - (wp + wm) / z_cut) / z_cut;
    acc / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_fixes_normalization() {
        for dim in [1, 2] {
            let k = PoissonKernel::new(dim).unwrap();
            for t in [0.1, 1.0, 7.0] {
                let m = k.mass_quadrature(t, 1e-12);
                assert!((m - 1.0).abs() < 1e-9, "dim {dim} t {t}: mass {m}");
            }
        }
    }

    #[test]
    fn self_similar_scaling() {
        // P(x, t) = t^{-n} P(x/t, 1)
        for dim in [1usize, 2] {
            let k = PoissonKernel::new(dim).unwrap();
            for t in [0.25, 1.0, 3.0] {
                for r in [0.0, 0.7, 2.0, 11.0] {
                    let lhs = k.eval_radial(r, t);
                    let rhs = k.eval_radial(r / t, 1.0) / t.powi(dim as i32);
                    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn decay_bound_with_kernel_constant() {
        // P <= c_n min(t^{-n}, t / |x|^{n+1}) pointwise
        for dim in [1usize, 2] {
            let k = PoissonKernel::new(dim).unwrap();
            let c = k.normalization();
            for t in [0.5, 1.0, 4.0] {
                for r in [0.01, 0.5, 1.0, 10.0, 100.0] {
                    let p = k.eval_radial(r, t);
                    let bound = c * (t.powi(-(dim as i32))).min(t / r.powi(dim as i32 + 1));
                    assert!(p <= bound * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn semigroup_under_convolution() {
        // P(., s) * P(., t) = P(., s + t) on the line
        let k = PoissonKernel::new(1).unwrap();
        let (s, t) = (0.4, 0.9);
        for x in [0.0, 0.8, -2.5] {
            let conv = quadrature::integrate_line(
                |y| k.eval_radial(y.abs(), s) * k.eval_radial((x - y).abs(), t),
                1e-12,
            )
            .0;
            let direct = k.eval_radial(x.abs(), s + t);
            assert!((conv - direct).abs() < 1e-10, "x {x}: {conv} vs {direct}");
        }
    }

    #[test]
    fn periodized_kernel_matches_the_lattice_sum() {
        let k = PoissonKernel::new(1).unwrap();
        let (t, x_half) = (0.8, 7.0);
        for x in [0.0, 1.3, -6.9] {
            let mut lattice = 0.0;
            for j in -20000i64..=20000 {
                lattice += k.eval_radial((x + 2.0 * x_half * j as f64).abs(), t);
            }
            let closed = periodized_kernel_1d(x, t, x_half);
            // the tail of the lattice sum is ~ c t / (2 X K)
            assert!((closed - lattice).abs() < 1e-6, "x {x}: {closed} vs {lattice}");
        }
    }

    #[test]
    fn periodized_kernel_has_unit_mass_on_the_torus() {
        let (t, x_half) = (1.7, 5.0);
        let (m, _) = quadrature::integrate(
            |x| periodized_kernel_1d(x, t, x_half),
            -x_half,
            x_half,
            1e-12,
        );
        assert!((m - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_integral_recovers_the_symbol_on_cosines() {
        // Lambda cos(k x) = |k| cos(k x)
        for kfreq in [0.5f64, 1.0, 2.0] {
            for x in [0.0, 0.3, 1.1] {
                let v = lambda_singular_1d(|y| (kfreq * y).cos(), x, 1e-10);
                let expect = kfreq * (kfreq * x).cos();
                assert!((v - expect).abs() < 1e-6, "k {kfreq} x {x}: {v} vs {expect}");
            }
        }
    }
}
