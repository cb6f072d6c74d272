//! Small least-squares fits for measured decay data.

use crate::error::{Error, Result};

/// Result of fitting y = C x^b by least squares on log-log data.
#[derive(Debug, Clone, Copy)]
pub struct PowerFit {
    pub exponent: f64,
    /// Standard error of the exponent under the usual normal model.
    pub stderr: f64,
    pub prefactor: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch("fit abscissae and ordinates differ".into()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("fit needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = if n > 2 { (rss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, intercept, stderr, (rss / nf).sqrt()))
}

/// Fit y = C x^b; requires strictly positive data.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("power-law fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, stderr, residual) = linear_fit(&lx, &ly)?;
    Ok(PowerFit { exponent: slope, stderr, prefactor: intercept.exp(), residual })
}

/// Fit y = C exp(b x); returns (b, stderr of b).
pub fn fit_exponential_rate(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if ys.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("exponential fit needs positive finite data".into()));
    }
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, _, stderr, _) = linear_fit(xs, &ly)?;
    Ok((slope, stderr))
}

/// First-order Richardson estimate: assuming value(h) = limit + kappa h,
/// two evaluations at h and h/refinement give kappa.
pub fn richardson_kappa(coarse: f64, fine: f64, h: f64, refinement: f64) -> f64 {
    (coarse - fine) / (h * (1.0 - 1.0 / refinement))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let xs: Vec<f64> = (1..12).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x.powf(-0.75)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.exponent + 0.75).abs() < 1e-12);
        assert!((fit.prefactor - 2.5).abs() < 1e-10);
        assert!(fit.stderr < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn stderr_grows_with_noise() {
        let xs: Vec<f64> = (1..40).map(|k| 1.1f64.powi(k)).collect();
        let wiggle = |k: usize| 1.0 + 0.05 * ((k * 2654435761) % 17) as f64 / 17.0;
        let ys: Vec<f64> = xs.iter().enumerate().map(|(k, x)| x.powf(-1.0) * wiggle(k)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.exponent + 1.0).abs() < 0.05);
        assert!(fit.stderr > 1e-4);
    }

    #[test]
    fn exponential_rate() {
        let xs: Vec<f64> = (0..20).map(|k| 0.5 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 7.0 * (-0.9 * x).exp()).collect();
        let (rate, err) = fit_exponential_rate(&xs, &ys).unwrap();
        assert!((rate + 0.9).abs() < 1e-12);
        assert!(err < 1e-12);
    }

    #[test]
    fn richardson_recovers_linear_error_constant() {
        let (limit, kappa, h) = (0.4, 3.0, 0.02);
        let coarse = limit + kappa * h;
        let fine = limit + kappa * h / 2.0;
        let k = richardson_kappa(coarse, fine, h, 2.0);
        assert!((k - kappa).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, -3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_power_law(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
