//! Periodic spectral machinery: FFT wrappers, real Fourier multipliers,
//! derivatives, and band-limited evaluation at off-grid uniform points.
//!
//! Frequencies on [-X, X) are xi_k = pi k / X with k in the usual FFT
//! ordering. Real multipliers treat fields as trigonometric interpolants;
//! the Nyquist mode is kept for even symbols and zeroed for odd ones.
//!
//! Off-grid evaluation uses the Bluestein chirp factorization, so sampling a
//! trig interpolant at M uniformly spaced points costs three FFTs of the
//! padded length. That makes exact dilation x -> lambda x an O(N log N)
//! operation, which the similarity-frame integrator leans on.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

type Plan = Arc<dyn Fft<f64>>;

fn plans(len: usize) -> (Plan, Plan) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
        })
        .clone()
}

pub fn fft_forward(buf: &mut [Complex64]) {
    plans(buf.len()).0.process(buf);
}

pub fn fft_inverse(buf: &mut [Complex64]) {
    let len = buf.len();
    plans(len).1.process(buf);
    let scale = 1.0 / len as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Signed frequency index in FFT ordering: 0, 1, ..., N/2, -N/2+1, ..., -1.
fn freq_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// xi_k = pi k / X in FFT ordering.
pub fn frequencies(points: usize, half_width: f64) -> Vec<f64> {
    (0..points)
        .map(|k| std::f64::consts::PI * freq_index(k, points) as f64 / half_width)
        .collect()
}

pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn real_parts(buf: &[Complex64]) -> Vec<f64> {
    buf.iter().map(|c| c.re).collect()
}

/// In-place 2d FFT over an np x np row-major buffer.
pub fn fft_2d(buf: &mut [Complex64], np: usize, inverse: bool) {
    debug_assert_eq!(buf.len(), np * np);
    let (fwd, inv) = plans(np);
    let plan = if inverse { inv } else { fwd };
    for row in buf.chunks_exact_mut(np) {
        plan.process(row);
    }
    let mut col = vec![Complex64::default(); np];
    for c in 0..np {
        for r in 0..np {
            col[r] = buf[r * np + c];
        }
        plan.process(&mut col);
        for r in 0..np {
            buf[r * np + c] = col[r];
        }
    }
    if inverse {
        let scale = 1.0 / (np * np) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// Apply a real even symbol, given per flat index, to real samples.
pub fn apply_symbol(grid: &Grid, values: &[f64], symbol: &[f64]) -> Vec<f64> {
    debug_assert_eq!(values.len(), grid.len());
    debug_assert_eq!(symbol.len(), grid.len());
    let mut buf = to_complex(values);
    match grid.dim() {
        1 => {
            fft_forward(&mut buf);
            for (v, &s) in buf.iter_mut().zip(symbol) {
                *v *= s;
            }
            fft_inverse(&mut buf);
        }
        _ => {
            let np = grid.points();
            fft_2d(&mut buf, np, false);
            for (v, &s) in buf.iter_mut().zip(symbol) {
                *v *= s;
            }
            fft_2d(&mut buf, np, true);
        }
    }
    real_parts(&buf)
}

/// |xi|^s per flat index.
pub fn symbol_lambda(grid: &Grid, s: f64) -> Vec<f64> {
    let xi = frequencies(grid.points(), grid.half_width());
    match grid.dim() {
        1 => xi.iter().map(|&x| x.abs().powf(s)).collect(),
        _ => {
            let np = grid.points();
            let mut out = Vec::with_capacity(np * np);
            for r in 0..np {
                for c in 0..np {
                    out.push(xi[c].hypot(xi[r]).powf(s));
                }
            }
            out
        }
    }
}

/// exp(-t |xi|^s - viscosity t |xi|^2) per flat index.
pub fn symbol_semigroup(grid: &Grid, s: f64, t: f64, viscosity: f64) -> Vec<f64> {
    let xi = frequencies(grid.points(), grid.half_width());
    let factor = |m: f64| (-t * m.powf(s) - viscosity * t * m * m).exp();
    match grid.dim() {
        1 => xi.iter().map(|&x| factor(x.abs())).collect(),
        _ => {
            let np = grid.points();
            let mut out = Vec::with_capacity(np * np);
            for r in 0..np {
                for c in 0..np {
                    out.push(factor(xi[c].hypot(xi[r])));
                }
            }
            out
        }
    }
}

/// A real Fourier multiplier bound to a grid.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    grid: Grid,
    symbol: Vec<f64>,
}

impl SpectralOperator {
    /// Fractional Laplacian Lambda^s.
    pub fn lambda(grid: Grid, s: f64) -> Self {
        let symbol = symbol_lambda(&grid, s);
        SpectralOperator { grid, symbol }
    }

    /// Semigroup exp(-t Lambda^s) with an optional exact viscous factor.
    pub fn semigroup(grid: Grid, s: f64, t: f64, viscosity: f64) -> Self {
        let symbol = symbol_semigroup(&grid, s, t, viscosity);
        SpectralOperator { grid, symbol }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        apply_symbol(&self.grid, values, &self.symbol)
    }
}

/// Spectral derivative along one axis (0 = x1, 1 = x2).
/// The Nyquist mode is zeroed, as usual for odd-order derivatives.
pub fn derivative(grid: &Grid, values: &[f64], axis: usize) -> Vec<f64> {
    let np = grid.points();
    let xi = frequencies(np, grid.half_width());
    let mut buf = to_complex(values);
    match grid.dim() {
        1 => {
            fft_forward(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                let m = if k == np / 2 { 0.0 } else { xi[k] };
                *v *= Complex64::new(0.0, m);
            }
            fft_inverse(&mut buf);
        }
        _ => {
            fft_2d(&mut buf, np, false);
            for r in 0..np {
                for c in 0..np {
                    let k = if axis == 0 { c } else { r };
                    let m = if k == np / 2 { 0.0 } else { xi[k] };
                    buf[r * np + c] *= Complex64::new(0.0, m);
                }
            }
            fft_2d(&mut buf, np, true);
        }
    }
    real_parts(&buf)
}

/// Spectral second derivative along one axis.
pub fn second_derivative(grid: &Grid, values: &[f64], axis: usize) -> Vec<f64> {
    let np = grid.points();
    let xi = frequencies(np, grid.half_width());
    let mut buf = to_complex(values);
    match grid.dim() {
        1 => {
            fft_forward(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                *v *= -xi[k] * xi[k];
            }
            fft_inverse(&mut buf);
        }
        _ => {
            fft_2d(&mut buf, np, false);
            for r in 0..np {
                for c in 0..np {
                    let k = if axis == 0 { c } else { r };
                    buf[r * np + c] *= -xi[k] * xi[k];
                }
            }
            fft_2d(&mut buf, np, true);
        }
    }
    real_parts(&buf)
}

/// Band-limited evaluation of periodic samples at M uniform points
/// p_j = start + j * step, via the Bluestein chirp factorization.
///
/// Building the evaluator precomputes the chirp tables and the padded chirp
/// spectrum, so repeated evaluation (the per-step dilation of the similarity
/// integrator) costs three FFTs of the padded length plus O(N) phases.
pub struct UniformEvaluator {
    src_n: usize,
    count: usize,
    pad: usize,
    // e^{i phi k^2 / 2} for the source index after shifting to 0..2K
    chirp_a: Vec<Complex64>,
    // FFT of the padded, circularly placed conjugate chirp
    chirp_b_hat: Vec<Complex64>,
    // e^{-i phi (j + K)^2 / 2} restoration phase times the offset phase per j
    out_phase: Vec<Complex64>,
    // phase e^{i xi_k start} per source frequency slot (FFT order), over N
    start_phase: Vec<Complex64>,
    // Nyquist reconstruction cos(xi_{N/2} p_j)
    nyquist: Vec<f64>,
}

impl UniformEvaluator {
    pub fn new(src_n: usize, half_width: f64, start: f64, step: f64, count: usize) -> Self {
        let n = src_n;
        let k_half = n / 2 - 1; // symmetric modes -K..K with K = N/2 - 1
        let terms = 2 * k_half + 1;
        let phi = std::f64::consts::PI * step / half_width;
        let pad = (terms + count - 1).next_power_of_two();

        let half_angle = |m: f64| 0.5 * phi * m;
        let chirp_a: Vec<Complex64> = (0..terms)
            .map(|k| Complex64::from_polar(1.0, half_angle(k as f64 * k as f64)))
            .collect();
        let mut chirp_b = vec![Complex64::default(); pad];
        for m in -(terms as i64 - 1)..(count as i64) {
            let idx = m.rem_euclid(pad as i64) as usize;
            chirp_b[idx] = Complex64::from_polar(1.0, -half_angle((m * m) as f64));
        }
        fft_forward(&mut chirp_b);

        // sample index m sits at x_m = -X + m dx, so reconstructing at p
        // carries the phase e^{i xi_k (p + X)}, not e^{i xi_k p}
        let xi = frequencies(n, half_width);
        let start_phase: Vec<Complex64> = xi
            .iter()
            .map(|&x| Complex64::from_polar(1.0 / n as f64, x * (start + half_width)))
            .collect();

        // output phase: e^{i phi j^2/2} from Bluestein times e^{-i K j phi}
        // from shifting modes -K..K to 0..2K
        let out_phase: Vec<Complex64> = (0..count)
            .map(|j| {
                let jf = j as f64;
                Complex64::from_polar(1.0, half_angle(jf * jf) - k_half as f64 * jf * phi)
            })
            .collect();

        let xi_nyq = std::f64::consts::PI * (n / 2) as f64 / half_width;
        let nyquist: Vec<f64> = (0..count)
            .map(|j| (xi_nyq * (start + j as f64 * step + half_width)).cos() / n as f64)
            .collect();

        UniformEvaluator { src_n: n, count, pad, chirp_a, chirp_b_hat: chirp_b, out_phase, start_phase, nyquist }
    }

    /// Evaluator for the dilation y -> lambda y on the grid's own nodes.
    pub fn dilation(grid: &Grid, lambda: f64) -> Self {
        let x = grid.half_width();
        let dx = grid.spacing();
        Self::new(grid.points(), x, -lambda * x, lambda * dx, grid.points())
    }

    pub fn eval(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.src_n);
        let n = self.src_n;
        let k_half = n / 2 - 1;
        let mut spectrum = to_complex(values);
        fft_forward(&mut spectrum);
        let nyq_coeff = spectrum[n / 2].re;

        // pack modes -K..K (FFT slots n-K..n-1, 0..K) with the start phase
        let mut work = vec![Complex64::default(); self.pad];
        for (slot, w) in work.iter_mut().take(2 * k_half + 1).enumerate() {
            let k_signed = slot as i64 - k_half as i64;
            let fft_slot = k_signed.rem_euclid(n as i64) as usize;
            *w = spectrum[fft_slot] * self.start_phase[fft_slot] * self.chirp_a[slot];
        }
        fft_forward(&mut work);
        for (w, &b) in work.iter_mut().zip(&self.chirp_b_hat) {
            *w *= b;
        }
        fft_inverse(&mut work);

        (0..self.count)
            .map(|j| (work[j] * self.out_phase[j]).re + nyq_coeff * self.nyquist[j])
            .collect()
    }
}

/// Direct off-grid evaluation of the trig interpolant at a single point.
pub fn eval_at(values: &[f64], half_width: f64, p: f64) -> f64 {
    let mut spectrum = to_complex(values);
    fft_forward(&mut spectrum);
    eval_spectrum_at(&spectrum, half_width, p)
}

/// Same as `eval_at` but reusing a precomputed spectrum.
pub fn eval_spectrum_at(spectrum: &[Complex64], half_width: f64, p: f64) -> f64 {
    let n = spectrum.len();
    // samples start at -X, hence the shifted phase argument
    let q = p + half_width;
    let mut acc = spectrum[0].re;
    for k in 1..n / 2 {
        let xi = std::f64::consts::PI * k as f64 / half_width;
        let ph = Complex64::from_polar(1.0, xi * q);
        acc += 2.0 * (spectrum[k] * ph).re;
    }
    let xi_nyq = std::f64::consts::PI * (n / 2) as f64 / half_width;
    acc += spectrum[n / 2].re * (xi_nyq * q).cos();
    acc / n as f64
}

/// Dilated samples v(lambda y_j) of 1d periodic samples.
pub fn dilate_1d(grid: &Grid, values: &[f64], lambda: f64) -> Vec<f64> {
    UniformEvaluator::dilation(grid, lambda).eval(values)
}

/// Separable 2d dilation v(lambda y) along both axes.
pub fn dilate_2d(grid: &Grid, values: &[f64], lambda: f64) -> Vec<f64> {
    let np = grid.points();
    let ev = UniformEvaluator::dilation(
        &Grid::new_1d(np, grid.half_width()).expect("axis grid"),
        lambda,
    );
    let mut rows = vec![0.0; np * np];
    for r in 0..np {
        let out = ev.eval(&values[r * np..(r + 1) * np]);
        rows[r * np..(r + 1) * np].copy_from_slice(&out);
    }
    let mut col = vec![0.0; np];
    let mut out = vec![0.0; np * np];
    for c in 0..np {
        for r in 0..np {
            col[r] = rows[r * np + c];
        }
        let new_col = ev.eval(&col);
        for r in 0..np {
            out[r * np + c] = new_col[r];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, x: f64) -> Grid {
        Grid::new_1d(n, x).unwrap()
    }

    #[test]
    fn lambda_eigenfunction_1d() {
        // Lambda cos(k pi x / X) = (k pi / X) cos(k pi x / X)
        let g = grid(256, 4.0);
        let k = 3.0;
        let xi = k * std::f64::consts::PI / 4.0;
        let vals: Vec<f64> = g.axis_coords().map(|x| (xi * x).cos()).collect();
        let out = SpectralOperator::lambda(g, 1.0).apply(&vals);
        for (o, v) in out.iter().zip(&vals) {
            assert!((o - xi * v).abs() < 1e-10);
        }
    }

    #[test]
    fn semigroup_eigen_decay() {
        // exp(-t Lambda) cos(3x) on [-pi, pi) decays by e^{-3t}
        let g = grid(128, std::f64::consts::PI);
        let vals: Vec<f64> = g.axis_coords().map(|x| (3.0 * x).cos()).collect();
        let out = SpectralOperator::semigroup(g, 1.0, 0.2, 0.0).apply(&vals);
        let factor = (-0.6f64).exp();
        for (o, v) in out.iter().zip(&vals) {
            assert!((o - factor * v).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_composition() {
        let g = grid(128, 10.0);
        let vals: Vec<f64> = g
            .axis_coords()
            .map(|x| (-0.5 * x * x).exp() + 0.3 * (0.9 * x).sin())
            .collect();
        let one = SpectralOperator::semigroup(g, 1.0, 0.7, 0.0).apply(&vals);
        let a = SpectralOperator::semigroup(g, 1.0, 0.3, 0.0).apply(&vals);
        let two = SpectralOperator::semigroup(g, 1.0, 0.4, 0.0).apply(&a);
        for (x, y) in one.iter().zip(&two) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_preserved_mass_killed() {
        let g = grid(64, 2.0);
        let vals: Vec<f64> = g.axis_coords().map(|x| 0.3 + (1.1 * x).cos().powi(2)).collect();
        let lam = SpectralOperator::lambda(g, 1.0).apply(&vals);
        let mean: f64 = lam.iter().sum::<f64>() / lam.len() as f64;
        assert!(mean.abs() < 1e-13, "Lambda output mean {mean}");
        let sg = SpectralOperator::semigroup(g, 1.0, 0.4, 0.0).apply(&vals);
        let m0: f64 = vals.iter().sum();
        let m1: f64 = sg.iter().sum();
        assert!((m0 - m1).abs() < 1e-10 * m0.abs());
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid(128, std::f64::consts::PI);
        let vals: Vec<f64> = g.axis_coords().map(|x| (5.0 * x).sin()).collect();
        let d = derivative(&g, &vals, 0);
        for (i, x) in g.axis_coords().enumerate() {
            assert!((d[i] - 5.0 * (5.0 * x).cos()).abs() < 1e-10);
        }
        let d2 = second_derivative(&g, &vals, 0);
        for (i, v) in vals.iter().enumerate() {
            assert!((d2[i] + 25.0 * v).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_2d_eigenfunction() {
        let g = Grid::new_2d(32, std::f64::consts::PI).unwrap();
        let np = g.points();
        let mut vals = vec![0.0; np * np];
        for r in 0..np {
            for c in 0..np {
                vals[r * np + c] = (2.0 * g.coord(c)).cos() * (1.0 * g.coord(r)).sin();
            }
        }
        let out = SpectralOperator::lambda(g, 1.0).apply(&vals);
        let expect = (4.0f64 + 1.0).sqrt();
        for (o, v) in out.iter().zip(&vals) {
            assert!((o - expect * v).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_evaluator_identity() {
        let g = grid(64, 3.0);
        let vals: Vec<f64> = g.axis_coords().map(|x| (x * 1.3).sin() + 0.2 * (2.0 * x).cos()).collect();
        let ev = UniformEvaluator::dilation(&g, 1.0);
        let out = ev.eval(&vals);
        for (o, v) in out.iter().zip(&vals) {
            assert!((o - v).abs() < 1e-12, "identity dilation drifted: {o} vs {v}");
        }
    }

    #[test]
    fn uniform_evaluator_matches_direct() {
        let g = grid(64, 5.0);
        // random-ish band-limited data
        let vals: Vec<f64> = g
            .axis_coords()
            .map(|x| (0.7 * x).sin() + 0.4 * (2.3 * x).cos() - 0.1 * (3.1 * x + 0.5).sin())
            .collect();
        let lambda = 1.37;
        let out = dilate_1d(&g, &vals, lambda);
        for (j, x) in g.axis_coords().enumerate() {
            let direct = eval_at(&vals, g.half_width(), lambda * x);
            assert!(
                (out[j] - direct).abs() < 1e-11,
                "j = {j}: chirp {o} vs direct {direct}",
                o = out[j]
            );
        }
    }

    #[test]
    fn dilation_of_pure_mode() {
        // v = cos(k xi0 y) dilated by lambda should sample cos(k xi0 lambda y)
        let g = grid(128, 8.0);
        let xi = 2.0 * std::f64::consts::PI / 8.0; // mode k = 2
        let vals: Vec<f64> = g.axis_coords().map(|y| (xi * y).cos()).collect();
        let lambda = 1.05;
        let out = dilate_1d(&g, &vals, lambda);
        for (j, y) in g.axis_coords().enumerate() {
            // lambda * y wraps periodically, consistent with the interpolant
            let p = lambda * y;
            let expect = (xi * p).cos();
            assert!((out[j] - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn dilate_2d_separable() {
        let g = Grid::new_2d(32, 4.0).unwrap();
        let np = g.points();
        let xi = std::f64::consts::PI / 4.0;
        let mut vals = vec![0.0; np * np];
        for r in 0..np {
            for c in 0..np {
                vals[r * np + c] = (xi * g.coord(c)).cos() * (2.0 * xi * g.coord(r)).sin();
            }
        }
        let lambda = 1.1;
        let out = dilate_2d(&g, &vals, lambda);
        for r in 0..np {
            for c in 0..np {
                let expect = (xi * lambda * g.coord(c)).cos() * (2.0 * xi * lambda * g.coord(r)).sin();
                assert!((out[r * np + c] - expect).abs() < 1e-10);
            }
        }
    }
}
