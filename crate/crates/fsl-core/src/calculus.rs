//! Fractional calculus on fields: Lambda^s, the dissipative semigroup, and
//! gradients, all split as analytic-background plus spectral-deviation so
//! that non-decaying data never meets the periodic transform.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::spectral::{self, SpectralOperator};

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s <= 2.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::FractionalOrder(s))
    }
}

/// Lambda^s u. With a background attached only s = 1 is available, because
/// only there does the background have a closed-form image.
pub fn apply_lambda(field: &Field, s: f64) -> Result<Field> {
    check_order(s)?;
    let grid = *field.grid();
    let mut out = SpectralOperator::lambda(grid, s).apply(&field.deviation()?);
    if let Some(bg) = field.background() {
        if s != 1.0 {
            return Err(Error::InvalidArgument(format!(
                "Lambda^{s} of a field with background: only s = 1 has an analytic background image"
            )));
        }
        let lphi = bg.lambda_phi_values(&grid)?;
        for (o, l) in out.iter_mut().zip(&lphi) {
            *o += l;
        }
    }
    Ok(Field::new(grid, out, None)?.with_time(field.time()))
}

/// exp(-t Lambda^s) u, optionally with an extra viscous factor
/// exp(-viscosity t |xi|^2). The background flows by tau -> tau + t, which
/// is its exact semigroup image when s = 1 and viscosity = 0; other
/// parameters therefore require a background-free field.
pub fn heat_semigroup(field: &Field, t: f64, s: f64, viscosity: f64) -> Result<Field> {
    check_order(s)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("semigroup time {t}")));
    }
    if !(viscosity >= 0.0) || !viscosity.is_finite() {
        return Err(Error::InvalidArgument(format!("viscosity {viscosity}")));
    }
    if field.background().is_some() && (s != 1.0 || viscosity != 0.0) {
        return Err(Error::InvalidArgument(
            "semigroup with background: only s = 1 and zero viscosity evolve the background exactly"
                .into(),
        ));
    }
    let grid = *field.grid();
    let mut v = SpectralOperator::semigroup(grid, s, t, viscosity).apply(&field.deviation()?);
    let background = field.background().map(|bg| bg.advanced(t));
    if let Some(bg) = &background {
        let phi = bg.reference_values(&grid)?;
        for (o, p) in v.iter_mut().zip(&phi) {
            *o += p;
        }
    }
    Ok(Field::new(grid, v, background)?.with_time(field.time() + t))
}

/// Per-axis gradient of the full field: spectral on the deviation, analytic
/// (1d) or centered finite differences (2d) on the background.
pub fn gradient(field: &Field) -> Result<Vec<Vec<f64>>> {
    let grid = *field.grid();
    let dev = field.deviation()?;
    let mut axes = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        axes.push(spectral::derivative(&grid, &dev, axis));
    }
    if let Some(bg) = field.background() {
        match grid.dim() {
            1 => {
                for (g, x) in axes[0].iter_mut().zip(grid.axis_coords()) {
                    *g += bg.phi_prime_1d(x);
                }
            }
            _ => {
                let phi = bg.reference_values(&grid)?;
                let np = grid.points();
                let dx = grid.spacing();
                for axis in 0..2 {
                    let out = &mut axes[axis];
                    for r in 0..np {
                        for c in 0..np {
                            let (lo, hi, w) = one_sided(if axis == 0 { c } else { r }, np);
                            let (ilo, ihi) = if axis == 0 {
                                (r * np + lo, r * np + hi)
                            } else {
                                (lo * np + c, hi * np + c)
                            };
                            out[r * np + c] += (phi[ihi] - phi[ilo]) / (w * dx);
                        }
                    }
                }
            }
        }
    }
    Ok(axes)
}

// centered difference interior, one-sided at the edges
fn one_sided(i: usize, n: usize) -> (usize, usize, f64) {
    if i == 0 {
        (0, 1, 1.0)
    } else if i + 1 == n {
        (n - 2, n - 1, 1.0)
    } else {
        (i - 1, i + 1, 2.0)
    }
}

/// Second derivative of a 1d field: the spectral derivative applied twice
/// to the deviation, closed form on the background.
pub fn second_derivative_1d(field: &Field) -> Result<Vec<f64>> {
    let grid = *field.grid();
    if grid.dim() != 1 {
        return Err(Error::Dimension { required: 1, actual: grid.dim() });
    }
    let dev = field.deviation()?;
    let first = spectral::derivative(&grid, &dev, 0);
    let mut second = spectral::derivative(&grid, &first, 0);
    if let Some(bg) = field.background() {
        for (s, x) in second.iter_mut().zip(grid.axis_coords()) {
            *s += bg.phi_second_1d(x);
        }
    }
    Ok(second)
}

/// sup over nodes of the euclidean gradient magnitude.
pub fn max_gradient(field: &Field) -> Result<f64> {
    let axes = gradient(field)?;
    let mut m = 0.0f64;
    for i in 0..field.grid().len() {
        let s: f64 = axes.iter().map(|g| g[i] * g[i]).sum();
        m = m.max(s.sqrt());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::FarFieldProfile;
    use crate::field::make_shock_data;
    use crate::grid::Grid;
    use crate::poisson;

    #[test]
    fn lambda_of_pure_background_is_the_closed_form() {
        let g = Grid::new_1d(512, 64.0).unwrap();
        let bg = FarFieldProfile::step(1.3, 0.2, 0.8).unwrap();
        let (field, _) = make_shock_data(g, bg.clone(), None).unwrap();
        let out = apply_lambda(&field, 1.0).unwrap();
        for (i, x) in g.axis_coords().enumerate() {
            assert!((out.values()[i] - bg.lambda_phi_1d(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn lambda_of_composite_field_matches_singular_integral() {
        // background plus bump against the quadrature definition; the
        // tolerance covers the periodization error of the deviation part
        let g = Grid::new_1d(16384, 600.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let bump = |x: f64| (-x * x).exp();
        let (field, _) = make_shock_data(g, bg.clone(), Some(&|p: &[f64]| bump(p[0]))).unwrap();
        let out = apply_lambda(&field, 1.0).unwrap();
        let full = |x: f64| bg.phi_1d(x) + bump(x);
        for x in [0.0, 0.5, -1.25] {
            let i = g.nearest_index(x, 0.0);
            let xn = g.coord(i);
            let oracle = poisson::lambda_singular_1d(full, xn, 1e-10);
            assert!(
                (out.values()[i] - oracle).abs() < 1e-5,
                "x {xn}: spectral {v} vs oracle {oracle}",
                v = out.values()[i]
            );
        }
    }

    #[test]
    fn order_validation() {
        let g = Grid::new_1d(32, 1.0).unwrap();
        let field = Field::zeros(g);
        assert!(matches!(apply_lambda(&field, 0.0), Err(Error::FractionalOrder(_))));
        assert!(matches!(apply_lambda(&field, 2.5), Err(Error::FractionalOrder(_))));
        assert!(apply_lambda(&field, 2.0).is_ok());
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (shock, _) = make_shock_data(g, bg, None).unwrap();
        assert!(apply_lambda(&shock, 0.5).is_err());
        assert!(heat_semigroup(&shock, 0.1, 1.0, 0.1).is_err());
    }

    #[test]
    fn semigroup_advances_background_scale_exactly() {
        let g = Grid::new_1d(256, 32.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let out = heat_semigroup(&field, 2.5, 1.0, 0.0).unwrap();
        assert_eq!(out.background().unwrap().tau(), 3.5);
        let expect = FarFieldProfile::step(1.0, 0.0, 3.5).unwrap();
        for (i, x) in g.axis_coords().enumerate() {
            assert!((out.values()[i] - expect.phi_1d(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn semigroup_matches_periodized_kernel_quadrature() {
        // spectral multiplier vs real-space convolution with the closed-form
        // periodized kernel: same mathematical object, different route
        let g = Grid::new_1d(2048, 40.0).unwrap();
        let gauss = |x: f64| (-x * x).exp();
        let field = Field::from_fn_1d(g, gauss).unwrap();
        let t = 0.7;
        let out = heat_semigroup(&field, t, 1.0, 0.0).unwrap();
        for x in [0.0, 1.0, -3.5] {
            // compare at the node nearest x; the gaussian and its trig
            // interpolant differ at roundoff here
            let i = g.nearest_index(x, 0.0);
            let xn = g.coord(i);
            let oracle = poisson::convolve_periodic_1d(gauss, t, 40.0, xn, 1e-11);
            assert!(
                (out.values()[i] - oracle).abs() < 1e-9,
                "x {xn}: spectral {v} vs quadrature {oracle}",
                v = out.values()[i]
            );
        }
    }

    #[test]
    fn viscous_factor_on_an_eigenfunction() {
        let g = Grid::new_1d(128, std::f64::consts::PI).unwrap();
        let field = Field::from_fn_1d(g, |x| (3.0 * x).cos()).unwrap();
        let out = heat_semigroup(&field, 0.5, 1.0, 0.2).unwrap();
        let factor = (-0.5 * 3.0 - 0.2 * 0.5 * 9.0f64).exp();
        for (o, v) in out.values().iter().zip(field.values()) {
            assert!((o - factor * v).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_composite_field() {
        let g = Grid::new_1d(1024, 32.0).unwrap();
        let bg = FarFieldProfile::step(0.8, 0.0, 1.2).unwrap();
        let (field, _) = make_shock_data(
            g,
            bg.clone(),
            Some(&|p: &[f64]| (-p[0] * p[0]).exp()),
        )
        .unwrap();
        let grad = gradient(&field).unwrap();
        for (i, x) in g.axis_coords().enumerate() {
            let expect = bg.phi_prime_1d(x) - 2.0 * x * (-x * x).exp();
            assert!((grad[0][i] - expect).abs() < 1e-8, "x {x}");
        }
        let mg = max_gradient(&field).unwrap();
        let peak = grad[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((mg - peak).abs() < 1e-14);
    }

    #[test]
    fn second_derivative_of_composite_field() {
        let g = Grid::new_1d(1024, 32.0).unwrap();
        let bg = FarFieldProfile::step(0.8, 0.0, 1.2).unwrap();
        let (field, _) = make_shock_data(
            g,
            bg.clone(),
            Some(&|p: &[f64]| (-p[0] * p[0]).exp()),
        )
        .unwrap();
        let second = second_derivative_1d(&field).unwrap();
        for (i, x) in g.axis_coords().enumerate() {
            let expect = bg.phi_second_1d(x) + (4.0 * x * x - 2.0) * (-x * x).exp();
            assert!((second[i] - expect).abs() < 1e-7, "x {x}");
        }
    }
}
