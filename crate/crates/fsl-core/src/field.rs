//! Sampled scalar fields with an optional non-decaying analytic background.
//!
//! A `Field` holds node samples of the full state u. When a far-field
//! profile is attached, u = phi + v splits into the analytic background phi
//! and a decaying deviation v; spectral operations act on v only, so the
//! periodic wrap never touches the non-decaying part.

use crate::error::{Error, Result};
use crate::farfield::FarFieldProfile;
use crate::flux::FluxFunction;
use crate::grid::Grid;
use crate::spectral::{self, UniformEvaluator};

#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    background: Option<FarFieldProfile>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, background: Option<FarFieldProfile>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bg) = &background {
            if bg.dim() != grid.dim() {
                return Err(Error::Dimension { required: grid.dim(), actual: bg.dim() });
            }
        }
        Ok(Field { grid, values, background, time: 0.0 })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { values: vec![0.0; grid.len()], grid, background: None, time: 0.0 }
    }

    pub fn from_fn_1d(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Dimension { required: 1, actual: grid.dim() });
        }
        let values = grid.axis_coords().map(f).collect();
        Field::new(grid, values, None)
    }

    pub fn from_fn_2d(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::Dimension { required: 2, actual: grid.dim() });
        }
        let np = grid.points();
        let mut values = Vec::with_capacity(np * np);
        for r in 0..np {
            for c in 0..np {
                values.push(f(grid.coord(c), grid.coord(r)));
            }
        }
        Field::new(grid, values, None)
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn with_background(mut self, background: Option<FarFieldProfile>) -> Result<Self> {
        if let Some(bg) = &background {
            if bg.dim() != self.grid.dim() {
                return Err(Error::Dimension { required: self.grid.dim(), actual: bg.dim() });
            }
        }
        self.background = background;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn background(&self) -> Option<&FarFieldProfile> {
        self.background.as_ref()
    }

    pub fn set_background(&mut self, background: Option<FarFieldProfile>) {
        self.background = background;
    }

    /// Background samples on this grid, if a background is attached.
    pub fn background_values(&self) -> Result<Option<Vec<f64>>> {
        match &self.background {
            Some(bg) => Ok(Some(bg.reference_values(&self.grid)?)),
            None => Ok(None),
        }
    }

    /// Deviation v = u - phi; a copy of the samples when no background is set.
    pub fn deviation(&self) -> Result<Vec<f64>> {
        match self.background_values()? {
            Some(phi) => Ok(self.values.iter().zip(&phi).map(|(u, p)| u - p).collect()),
            None => Ok(self.values.clone()),
        }
    }

    /// Largest |u| over the samples and the far-field limits.
    pub fn amplitude_bound(&self) -> f64 {
        let mut m = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(bg) = &self.background {
            m = m.max(bg.amplitude_bound());
        }
        m
    }

    /// Sample range over nodes and far-field limits.
    pub fn value_range(&self) -> (f64, f64) {
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

    /// Integral of the deviation, dx^n weighted.
    pub fn deviation_mass(&self) -> Result<f64> {
        Ok(self.deviation()?.iter().sum::<f64>() * self.grid.cell_volume())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Point evaluation: trig interpolation of the deviation plus the exact
    /// background. 2d deviations use bilinear interpolation.
    pub fn sample_at(&self, point: &[f64]) -> Result<f64> {
        self.sampler()?.eval(point)
    }

    /// Precomputes the deviation spectrum for repeated point evaluation.
    pub fn sampler(&self) -> Result<FieldSampler<'_>> {
        let dev = self.deviation()?;
        let spectrum = match self.grid.dim() {
            1 => {
                let mut buf = spectral::to_complex(&dev);
                spectral::fft_forward(&mut buf);
                Some(buf)
            }
            _ => None,
        };
        Ok(FieldSampler { field: self, deviation: dev, spectrum })
    }

    /// Samples of u(lambda x) on the same grid; time becomes t / lambda and
    /// the background contracts its scale exactly. The deviation is treated
    /// as periodic, so it must be negligible near the boundary for the
    /// result to be meaningful.
    pub fn rescale(&self, lambda: f64) -> Result<Field> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("rescale factor {lambda}")));
        }
        let dev = self.deviation()?;
        let scaled = match self.grid.dim() {
            1 => spectral::dilate_1d(&self.grid, &dev, lambda),
            _ => spectral::dilate_2d(&self.grid, &dev, lambda),
        };
        self.rebuild_from_deviation(scaled, lambda)
    }

    /// Samples of u(lambda x) on a different grid. Errors when the requested
    /// window lambda * X_target reaches outside the source domain.
    pub fn rescale_to(&self, target: Grid, lambda: f64) -> Result<Field> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("rescale factor {lambda}")));
        }
        if target.dim() != self.grid.dim() {
            return Err(Error::Dimension { required: self.grid.dim(), actual: target.dim() });
        }
        let coverage = lambda * target.half_width() / self.grid.half_width();
        if coverage > 1.0 + 1e-12 {
            return Err(Error::Coverage { lambda, coverage });
        }
        let dev = self.deviation()?;
        let ev = UniformEvaluator::new(
            self.grid.points(),
            self.grid.half_width(),
            -lambda * target.half_width(),
            lambda * target.spacing(),
            target.points(),
        );
        let scaled = match self.grid.dim() {
            1 => ev.eval(&dev),
            _ => {
                let ns = self.grid.points();
                let nt = target.points();
                // rows: source rows sampled at the target columns
                let mut rows = vec![0.0; ns * nt];
                for r in 0..ns {
                    let out = ev.eval(&dev[r * ns..(r + 1) * ns]);
                    rows[r * nt..(r + 1) * nt].copy_from_slice(&out);
                }
                let mut col = vec![0.0; ns];
                let mut out = vec![0.0; nt * nt];
                for c in 0..nt {
                    for r in 0..ns {
                        col[r] = rows[r * nt + c];
                    }
                    let new_col = ev.eval(&col);
                    for r in 0..nt {
                        out[r * nt + c] = new_col[r];
                    }
                }
                out
            }
        };
        let mut field = Field::new(
            target,
            scaled,
            self.background.as_ref().map(|bg| bg.dilated(lambda)),
        )?;
        if let Some(phi) = field.background_values()? {
            for (v, p) in field.values.iter_mut().zip(&phi) {
                *v += p;
            }
        }
        field.time = self.time / lambda;
        Ok(field)
    }

    fn rebuild_from_deviation(&self, deviation: Vec<f64>, lambda: f64) -> Result<Field> {
        let background = self.background.as_ref().map(|bg| bg.dilated(lambda));
        let mut field = Field::new(self.grid, deviation, background)?;
        if let Some(phi) = field.background_values()? {
            for (v, p) in field.values.iter_mut().zip(&phi) {
                *v += p;
            }
        }
        field.time = self.time / lambda;
        Ok(field)
    }
}

/// Cached point evaluator for a field.
pub struct FieldSampler<'a> {
    field: &'a Field,
    deviation: Vec<f64>,
    spectrum: Option<Vec<num_complex::Complex64>>,
}

impl FieldSampler<'_> {
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let grid = &self.field.grid;
        if point.len() != grid.dim() {
            return Err(Error::Dimension { required: grid.dim(), actual: point.len() });
        }
        let dev = match grid.dim() {
            1 => spectral::eval_spectrum_at(
                self.spectrum.as_ref().expect("1d sampler has a spectrum"),
                grid.half_width(),
                point[0],
            ),
            _ => self.bilinear(point[0], point[1]),
        };
        let bg = match self.field.background() {
            Some(bg) => match grid.dim() {
                1 => bg.phi_1d(point[0]),
                _ => bg.phi_2d_point(point[0], point[1])?,
            },
            None => 0.0,
        };
        Ok(dev + bg)
    }

    fn bilinear(&self, x1: f64, x2: f64) -> f64 {
        let grid = &self.field.grid;
        let np = grid.points();
        let dx = grid.spacing();
        let locate = |x: f64| -> (usize, usize, f64) {
            let s = (x - (-grid.half_width())) / dx;
            let i0 = s.floor();
            let w = s - i0;
            let wrap = |k: i64| k.rem_euclid(np as i64) as usize;
            (wrap(i0 as i64), wrap(i0 as i64 + 1), w)
        };
        let (c0, c1, wc) = locate(x1);
        let (r0, r1, wr) = locate(x2);
        let v = |r: usize, c: usize| self.deviation[r * np + c];
        (1.0 - wr) * ((1.0 - wc) * v(r0, c0) + wc * v(r0, c1))
            + wr * ((1.0 - wc) * v(r1, c0) + wc * v(r1, c1))
    }
}

/// Diagnostics from shock-type initial data construction.
#[derive(Debug, Clone, Copy)]
pub struct ShockDataReport {
    /// |u(boundary) - far-field limit| from the analytic background tail.
    pub background_boundary_gap: f64,
    /// Largest perturbation magnitude on the domain boundary.
    pub perturbation_boundary: f64,
}

/// Shock-type initial data: the background profile evaluated on the grid
/// plus an optional compactly supported perturbation. The report records how
/// far the samples at the boundary still are from their far-field limits.
pub fn make_shock_data(
    grid: Grid,
    background: FarFieldProfile,
    perturbation: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<(Field, ShockDataReport)> {
    if background.dim() != grid.dim() {
        return Err(Error::Dimension { required: grid.dim(), actual: background.dim() });
    }
    let mut values = background.reference_values(&grid)?;
    let mut perturbation_boundary = 0.0f64;
    if let Some(p) = perturbation {
        match grid.dim() {
            1 => {
                for (i, x) in grid.axis_coords().enumerate() {
                    let v = p(&[x]);
                    values[i] += v;
                    if i == 0 || i + 1 == grid.points() {
                        perturbation_boundary = perturbation_boundary.max(v.abs());
                    }
                }
            }
            _ => {
                let np = grid.points();
                for r in 0..np {
                    for c in 0..np {
                        let v = p(&[grid.coord(c), grid.coord(r)]);
                        values[r * np + c] += v;
                        if r == 0 || c == 0 || r + 1 == np || c + 1 == np {
                            perturbation_boundary = perturbation_boundary.max(v.abs());
                        }
                    }
                }
            }
        }
    }
    let background_boundary_gap = match grid.dim() {
        1 => {
            // a - (2a/pi) atan(X/tau) = (2a/pi) atan(tau/X)
            let (a, _mu) = background.step_params().expect("1d background is a step");
            (2.0 * a.abs() / std::f64::consts::PI) * (background.tau() / grid.half_width()).atan()
        }
        _ => {
            let np = grid.points();
            let phi = background.reference_values(&grid)?;
            let mut gap = 0.0f64;
            for r in 0..np {
                for c in 0..np {
                    if r == 0 || c == 0 || r + 1 == np || c + 1 == np {
                        let (x1, x2) = grid.position(r * np + c);
                        gap = gap.max((phi[r * np + c] - background.far_value(x1, x2)).abs());
                    }
                }
            }
            gap
        }
    };
    let field = Field::new(grid, values, Some(background))?;
    Ok((field, ShockDataReport { background_boundary_gap, perturbation_boundary }))
}

/// Secant slope of the flux between two states, g = (f(u) - f(w)) / (u - w),
/// one vector per flux component. Where the states collide the slope fills
/// in continuously as f'((u + w) / 2), so g always lies between the extreme
/// values of f' on the joint range.
pub fn g_coefficient(flux: &FluxFunction, u: &Field, w: &Field) -> Result<Vec<Vec<f64>>> {
    if !u.grid().same_shape(w.grid()) {
        return Err(Error::ShapeMismatch("g coefficient needs matching grids".into()));
    }
    if flux.dim() != u.grid().dim() {
        return Err(Error::Dimension { required: u.grid().dim(), actual: flux.dim() });
    }
    let mut out = Vec::with_capacity(flux.dim());
    for c in 0..flux.dim() {
        let g = u
            .values()
            .iter()
            .zip(w.values())
            .map(|(&a, &b)| {
                let du = a - b;
                if du.abs() < 1e-12 * (1.0 + a.abs() + b.abs()) {
                    flux.deriv(c, 0.5 * (a + b))
                } else {
                    (flux.eval(c, a) - flux.eval(c, b)) / du
                }
            })
            .collect();
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::FarFieldProfile;

    #[test]
    fn shape_and_dim_validation() {
        let g = Grid::new_1d(16, 2.0).unwrap();
        assert!(Field::new(g, vec![0.0; 15], None).is_err());
        let bg2 = FarFieldProfile::angular(vec![1.0; 8], 1.0).unwrap();
        assert!(Field::new(g, vec![0.0; 16], Some(bg2)).is_err());
    }

    #[test]
    fn shock_data_boundary_gap_is_the_arctan_tail() {
        // at X = 100 tau the background still misses its limit by
        // (2a/pi) atan(1/100), about 6.37e-3, not anything smaller
        let g = Grid::new_1d(2048, 100.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, report) = make_shock_data(g, bg, None).unwrap();
        let expect = (2.0 / std::f64::consts::PI) * (0.01f64).atan();
        assert!((report.background_boundary_gap - expect).abs() < 1e-15);
        assert!((expect - 6.366e-3).abs() < 1e-5);
        // and the sampled left edge agrees with the analytic gap
        let left_gap = (field.values()[0] - 1.0).abs();
        assert!((left_gap - expect).abs() < 1e-12);
    }

    #[test]
    fn shock_data_perturbation_report() {
        let g = Grid::new_1d(256, 8.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let bump = |p: &[f64]| (-p[0] * p[0]).exp();
        let (_field, report) = make_shock_data(g, bg, Some(&bump)).unwrap();
        // the right edge node sits at X - dx, closer to zero than -X, so it
        // carries the larger of the two boundary samples
        let xr = g.coord(g.points() - 1);
        let edge = (-xr * xr).exp();
        assert!((report.perturbation_boundary - edge).abs() < 1e-40);
    }

    #[test]
    fn sample_at_reproduces_nodes() {
        let g = Grid::new_1d(128, 4.0).unwrap();
        let bg = FarFieldProfile::step(0.7, 0.1, 1.3).unwrap();
        let (field, _) = make_shock_data(g, bg, Some(&|p: &[f64]| (-p[0] * p[0]).exp())).unwrap();
        let sampler = field.sampler().unwrap();
        for i in (0..g.points()).step_by(17) {
            let x = g.coord(i);
            let v = sampler.eval(&[x]).unwrap();
            assert!((v - field.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_roundtrip_on_a_smooth_bump() {
        let g = Grid::new_1d(1024, 16.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 1.0).unwrap();
        let (field, _) =
            make_shock_data(g, bg, Some(&|p: &[f64]| (-p[0] * p[0]).exp() * (2.0 * p[0]).cos()))
                .unwrap();
        let field = field.with_time(3.0);
        let down = field.rescale(0.8).unwrap();
        assert!((down.time() - 3.75).abs() < 1e-12);
        assert!((down.background().unwrap().tau() - 1.25).abs() < 1e-12);
        let back = down.rescale(1.25).unwrap();
        assert!((back.time() - 3.0).abs() < 1e-12);
        let err = back
            .values()
            .iter()
            .zip(field.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-8, "roundtrip error {err}");
    }

    #[test]
    fn rescale_of_pure_background_is_exact() {
        // u = phi(.; tau) has zero deviation, so rescale must produce exactly
        // phi(.; tau / lambda) up to roundoff
        let g = Grid::new_1d(512, 32.0).unwrap();
        let bg = FarFieldProfile::step(1.0, 0.0, 2.0).unwrap();
        let (field, _) = make_shock_data(g, bg, None).unwrap();
        let scaled = field.rescale(1.6).unwrap();
        let expect = FarFieldProfile::step(1.0, 0.0, 1.25).unwrap();
        for (i, x) in g.axis_coords().enumerate() {
            assert!((scaled.values()[i] - expect.phi_1d(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn rescale_to_rejects_uncovered_windows() {
        let g = Grid::new_1d(256, 8.0).unwrap();
        let field = Field::from_fn_1d(g, |x| (-x * x).exp()).unwrap();
        let err = field.rescale_to(g, 1.5).unwrap_err();
        match err {
            Error::Coverage { coverage, .. } => assert!((coverage - 1.5).abs() < 1e-12),
            other => panic!("expected coverage error, got {other}"),
        }
        let small = Grid::new_1d(128, 4.0).unwrap();
        assert!(field.rescale_to(small, 1.5).is_ok());
    }

    #[test]
    fn g_coefficient_secant_and_fill() {
        let g = Grid::new_1d(64, 2.0).unwrap();
        let flux = FluxFunction::polynomial(vec![0.0, 0.0, 0.0, 1.0]); // u^3
        let u = Field::from_fn_1d(g, |x| 0.5 + 0.1 * x).unwrap();
        let w = Field::from_fn_1d(g, |x| -0.2 + 0.05 * x).unwrap();
        let gc = g_coefficient(&flux, &u, &w).unwrap();
        for i in 0..g.len() {
            let (a, b) = (u.values()[i], w.values()[i]);
            let expect = (a * a * a - b * b * b) / (a - b);
            assert!((gc[0][i] - expect).abs() < 1e-12);
        }
        // coincident states fall back to f'
        let gc2 = g_coefficient(&flux, &u, &u.clone()).unwrap();
        for i in 0..g.len() {
            let a = u.values()[i];
            assert!((gc2[0][i] - 3.0 * a * a).abs() < 1e-12);
        }
    }

    #[test]
    fn g_coefficient_stays_in_derivative_range() {
        let g = Grid::new_1d(128, 4.0).unwrap();
        let flux = FluxFunction::burgers();
        let u = Field::from_fn_1d(g, |x| (1.3 * x).sin()).unwrap();
        let w = Field::from_fn_1d(g, |x| 0.4 * (0.7 * x).cos()).unwrap();
        let gc = g_coefficient(&flux, &u, &w).unwrap();
        for i in 0..g.len() {
            let (a, b) = (u.values()[i], w.values()[i]);
            let (lo, hi) = (a.min(b), a.max(b));
            // f' = id for this flux, so the secant slope is the midpoint
            assert!(gc[0][i] >= lo - 1e-12 && gc[0][i] <= hi + 1e-12);
        }
    }
}
