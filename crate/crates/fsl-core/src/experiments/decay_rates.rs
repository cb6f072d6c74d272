//! Diffusive decay of ||u - u_ss||_q for perturbations measured in L^p.
//!
//! The run lives in similarity variables: the profile is a steady state
//! there, both it and the perturbed state are marched with the same
//! scheme, and physical-frame norms come from the exact scaling
//! ||u - u_ss||_{L^q(dx)} = t^{n/q} ||U - U_ss||_{L^q(dy)}.
//!
//! Norms are taken after removing the domain average of the difference.
//! The periodic frame pins the k = 0 mode: the dilation seam re-imports
//! the heavy tail of the deviation and both the multiplier and the
//! dilation hold constants fixed, so the torus average settles at a
//! wrap-in level of order ||v0||_1 / (pi X^2) instead of decaying like
//! 1/t as the window average of the line solution does.  Subtracting
//! the mean removes that pinned mode exactly.  The low nonzero modes of
//! the seam import are damped only on the scale xi_1 t ~ 1, leaving an
//! absolute bias of the same ||v0||_1 / (pi X^2) order in the recorded
//! norms; it is negligible while t stays well below X^2, which bounds
//! the usable fit window for a given domain.

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::evolve::evolve_similarity;
use crate::experiments::report::ExperimentReport;
use crate::experiments::{data, log_spaced, window};
use crate::field::Field;
use crate::fit::fit_power_law;
use crate::norms::lq_norm;
use crate::selfsimilar::{compute_profile, ProfileOptions};

const ALLOWED: &[&str] = &[
    "cases",
    "data",
    "t_max",
    "records",
    "bump_half_width",
    "tail_beta",
    "tail_amplitude",
    "fit_lo",
    "fit_hi",
    "slope_tol",
    "profile_s_max",
    "ds",
];

pub(crate) fn parse_index(text: &str) -> Result<f64> {
    if text == "inf" {
        return Ok(f64::INFINITY);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("bad Lebesgue index \"{text}\" (number or inf)")))?;
    if v < 1.0 {
        return Err(Error::Config(format!("Lebesgue index must be >= 1, got {v}")));
    }
    Ok(v)
}

fn parse_case(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("case \"{text}\" must look like p:q")));
    }
    let p = parse_index(parts[0])?;
    let q = parse_index(parts[1])?;
    if p > q {
        return Err(Error::Config(format!("case \"{text}\" needs p <= q")));
    }
    Ok((p, q))
}

fn index_label(v: f64) -> String {
    if v.is_infinite() { "inf".into() } else { format!("{v}") }
}

pub fn run(cfg: &ResolvedConfig) -> Result<ExperimentReport> {
    cfg.check_params(ALLOWED)?;
    if cfg.n != 1 {
        return Err(Error::Dimension { required: 1, actual: cfg.n });
    }
    let mut report = ExperimentReport::new("decay_rates", &cfg.digest(), cfg.seed);
    let grid = cfg.frame_grid()?;
    let flux = cfg.flux_function()?;
    let background = cfg.background()?;
    let scheme = cfg.scheme();

    let t_max = cfg.param_f64("t_max", 1.0e4)?;
    let records = cfg.param_usize("records", 49)?.max(8);
    let fit_lo = cfg.param_f64("fit_lo", 10.0)?;
    let fit_hi = cfg.param_f64("fit_hi", t_max)?;
    let slope_tol = cfg.param_f64("slope_tol", 0.15)?;
    let ds = cfg.param_f64("ds", 0.05)?;
    let data_kind = cfg.param_str("data", "auto")?;
    let bump_half_width = cfg.param_f64("bump_half_width", 2.0)?;
    let tail_beta = cfg.param_f64("tail_beta", 0.55)?;
    let tail_amplitude = cfg.param_f64("tail_amplitude", 0.5)?;
    let cases: Vec<(f64, f64)> = cfg
        .param_str_list("cases", &["1:inf"])?
        .iter()
        .map(|c| parse_case(c))
        .collect::<Result<_>>()?;

    // Data are planned before the profile march so an under-resolved
    // configuration becomes inconclusive instead of failing deep inside
    // the steady-state search.
    let mut plans: Vec<(f64, f64, String, Vec<f64>)> = Vec::new();
    for &(p, q) in &cases {
        let label = format!("p={},q={}", index_label(p), index_label(q));
        let kind = if data_kind == "auto" {
            if p <= 1.0 { "bump" } else { "tail" }
        } else {
            data_kind.as_str()
        };
        let v0: Vec<f64> = match kind {
            "zero" => vec![0.0; grid.len()],
            "bump" => {
                let datum = data::unit_mass_bump(bump_half_width);
                if datum.min_feature_width() < 4.0 * grid.spacing() {
                    report.mark_inconclusive(format!(
                        "[{label}] datum under-resolved: width {:.3} < 4 dx = {:.3}",
                        datum.min_feature_width(),
                        4.0 * grid.spacing()
                    ));
                    continue;
                }
                datum.sample(&grid)
            }
            "tail" => data::heavy_tail(&grid, tail_amplitude, tail_beta),
            other => return Err(Error::Config(format!("unknown data kind \"{other}\""))),
        };
        if kind == "tail" {
            report.note(format!(
                "[{label}] heavy-tail datum (1+y^2)^(-beta/2), beta = {tail_beta}: in L^p but \
                 not L^1, so the measured rate is -beta rather than the borderline -1/p"
            ));
        }
        plans.push((p, q, label, v0));
    }
    if plans.is_empty() {
        return Ok(report);
    }

    // The profile is the steady state of the very scheme used below, so
    // the measured difference decays to the march residual, not to the
    // spatial truncation error.
    let pure = Field::new(grid, background.reference_values(&grid)?, Some(background.clone()))?;
    let opts = ProfileOptions {
        s_max: cfg.param_f64("profile_s_max", 40.0)?,
        ds,
        scheme,
        ..ProfileOptions::default()
    };
    let profile = compute_profile(&pure, &flux, &opts)?;
    report.record_constant("profile_residual", profile.residual);
    let uss = profile.field.values().to_vec();
    let floor = (10.0 * profile.residual).max(1e-13);

    let times = log_spaced(1.0, t_max, records);
    for (p, q, label, v0) in plans {
        let v0_norm = lq_norm(&grid, &v0, p);
        let mut values = background.reference_values(&grid)?;
        for (u, v) in values.iter_mut().zip(&v0) {
            *u += v;
        }
        let mut state = Field::new(grid, values, Some(background.clone()))?.with_time(0.0);

        // n/q - n/p with n = 1 and 1/inf = 0.
        let expected = recip(q) - recip(p);
        let mut norm_series = Vec::with_capacity(times.len());
        let mut ratio_series = Vec::with_capacity(times.len());
        for &t in &times {
            if t > 1.0 {
                state = evolve_similarity(&state, &flux, t.ln(), ds, &scheme)?.field;
            }
            let mut diff: Vec<f64> =
                state.values().iter().zip(&uss).map(|(u, s)| u - s).collect();
            let mean = diff.iter().sum::<f64>() / diff.len() as f64;
            for d in diff.iter_mut() {
                *d -= mean;
            }
            let frame_norm = lq_norm(&grid, &diff, q);
            let phys_norm =
                if q.is_infinite() { frame_norm } else { t.powf(recip(q)) * frame_norm };
            norm_series.push((t, phys_norm));
            if v0_norm > 0.0 {
                ratio_series.push((t, phys_norm / (t.powf(expected) * v0_norm)));
            }
        }
        report.add_series(&format!("norm[{label}]"), norm_series.clone());
        if !ratio_series.is_empty() {
            report.add_series(&format!("ratio[{label}]"), ratio_series.clone());
        }

        let peak = norm_series.iter().map(|&(_, d)| d).fold(0.0f64, f64::max);
        if peak <= 1e-11 {
            report.record_check(
                &format!("difference identically zero [{label}]"),
                true,
                format!("max ||u - u_ss||_q = {peak:.2e}; datum is the profile itself"),
            );
            continue;
        }

        // A decaying series that reaches the march floor before covering
        // three decades of time cannot support a rate fit.
        if expected < -0.05 {
            if let Some(&(t_hit, _)) =
                norm_series.iter().find(|&&(_, d)| d <= 3.0 * floor)
            {
                if t_hit < 1.0e3 {
                    report.mark_inconclusive(format!(
                        "[{label}] difference hit the floor {floor:.2e} at t = {t_hit:.2e}, \
                         before three decades were measured"
                    ));
                    continue;
                }
            }
        }

        let (xs, ys) = window(&norm_series, fit_lo, fit_hi);
        match fit_power_law(&xs, &ys) {
            Ok(fit) => {
                report.record_exponent(&format!("slope[{label}]"), &fit, expected, slope_tol);
            }
            Err(e) => {
                report.mark_inconclusive(format!("[{label}] slope fit failed: {e}"));
                continue;
            }
        }

        let (_, ratio_tail): (Vec<f64>, Vec<f64>) =
            window(&ratio_series, t_max / 10.0, t_max);
        if ratio_tail.len() >= 3 {
            if p > 1.0 {
                let decreasing = ratio_tail.windows(2).all(|w| w[1] < w[0]);
                report.record_check(
                    &format!("o(1) ratio strictly decreasing [{label}]"),
                    decreasing,
                    format!(
                        "last decade: {:.4e} -> {:.4e}",
                        ratio_tail.first().unwrap(),
                        ratio_tail.last().unwrap()
                    ),
                );
            } else {
                let (rx, ry) = window(&ratio_series, t_max / 10.0, t_max);
                let slope =
                    fit_power_law(&rx, &ry).map(|f| f.exponent).unwrap_or(0.0);
                report.record_check(
                    &format!("O(1) ratio bounded [{label}]"),
                    slope <= 0.1,
                    format!("ratio slope over the last decade: {slope:.3}"),
                );
            }
        }
    }
    Ok(report)
}

fn recip(v: f64) -> f64 {
    if v.is_infinite() { 0.0 } else { 1.0 / v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::experiments::report::Verdict;
    use crate::poisson;

    #[test]
    fn case_parsing() {
        assert_eq!(parse_case("1:inf").unwrap(), (1.0, f64::INFINITY));
        assert_eq!(parse_case("2:2").unwrap(), (2.0, 2.0));
        assert!(parse_case("3:2").is_err());
        assert!(parse_case("0.5:1").is_err());
        assert!(parse_case("1").is_err());
    }

    /// Zero flux, unit-mass bump, (1, inf): the evolution is an exact
    /// Poisson convolution, so the decay is t^{-1}.  The sup at one
    /// record time is cross-checked against a line-convolution
    /// quadrature oracle evaluated at the peak.
    #[test]
    fn linear_rate_matches_the_kernel_oracle() {
        let text = "experiment = \"decay_rates\"\nflux = \"zero\"\na = 1.0\nN = 2048\nX = 64.5\n\
                    [params]\nt_max = 1.0e3\nrecords = 25\nfit_lo = 10.0\nbump_half_width = 2.0\n\
                    slope_tol = 0.05\nprofile_s_max = 6.0\n";
        let cfg = parse_config(text).unwrap();
        let mut report = run(&cfg).unwrap();
        report.finalize();
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.inconclusive);
        let slope = &report.exponents[0];
        assert!((slope.fitted + 1.0).abs() < 0.05, "slope {}", slope.fitted);

        // Oracle: for f = 0 the deviation evolves independently of the
        // background, v(t) = P(t - 1) * v0 on the line (data live at t = 1)
        // with its sup at 0.  The run reports the mean-free sup, so the
        // window average is removed here too: (1/L) int_{|x|<Xt} v dx / t,
        // with the inner kernel integral in closed form.  The comparison
        // sits at t = 10, where the sup is 450 times the seam bias
        // ||v0||_1 / (pi X^2); the tolerance leaves a factor of two over
        // the observed mismatch.
        let series = &report.series[0];
        let (t, measured) = series.points[8];
        let sigma = t - 1.0;
        let datum = data::unit_mass_bump(2.0);
        let kernel = poisson::PoissonKernel::new(1).unwrap();
        let (peak, err) = crate::quadrature::integrate(
            |z| kernel.eval(&[z], sigma) * datum.eval(z),
            -2.0,
            2.0,
            1e-10,
        );
        assert!(err < 1e-8);
        let half_window = 64.5 * t;
        let (mass_in, err2) = crate::quadrature::integrate(
            |z| {
                datum.eval(z) / std::f64::consts::PI
                    * (((half_window - z) / sigma).atan() + ((half_window + z) / sigma).atan())
            },
            -2.0,
            2.0,
            1e-10,
        );
        assert!(err2 < 1e-8);
        let oracle = peak - mass_in / (129.0 * t);
        assert!(
            (measured - oracle).abs() <= 5e-3 * oracle.max(1e-12),
            "t = {t}: measured {measured:.6e} vs oracle {oracle:.6e}"
        );
    }

    #[test]
    fn zero_perturbation_is_identically_the_profile() {
        let text = "experiment = \"decay_rates\"\nflux = \"zero\"\na = 0.8\nN = 1024\nX = 32.5\n\
                    [params]\ndata = \"zero\"\nt_max = 100.0\nrecords = 9\nprofile_s_max = 6.0\n";
        let cfg = parse_config(text).unwrap();
        let mut report = run(&cfg).unwrap();
        report.finalize();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.checks.iter().any(|c| c.name.contains("identically zero") && c.pass));
        assert!(report.exponents.is_empty());
    }

    #[test]
    fn coarse_grid_is_inconclusive() {
        let text = "experiment = \"decay_rates\"\nflux = \"burgers\"\na = 1.0\nN = 32\nX = 128.5\n\
                    [params]\nt_max = 100.0\nprofile_s_max = 4.0\n";
        let cfg = parse_config(text).unwrap();
        let mut report = run(&cfg).unwrap();
        report.finalize();
        assert_eq!(report.verdict, Verdict::Inconclusive);
        assert!(report.inconclusive[0].contains("under-resolved"));
    }
}

