//! Total-variation convergence toward the self-similar profile.
//!
//! Runs in similarity variables with the background started at its
//! fixed point, so u - u_ss is exactly the difference of deviations and
//! total variation (a dilation invariant) can be read off either frame.

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::evolve::evolve_similarity;
use crate::experiments::data;
use crate::experiments::dyadic_times;
use crate::experiments::report::ExperimentReport;
use crate::field::Field;
use crate::norms::tv_norm;
use crate::selfsimilar::{compute_profile, ProfileOptions};

const ALLOWED: &[&str] = &[
    "data",
    "bump_half_width",
    "bump_height",
    "t_final",
    "escape_radius",
    "decrease_fraction",
    "profile_s_max",
    "ds",
];

fn in_box_tv(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

pub fn run(cfg: &ResolvedConfig) -> Result<ExperimentReport> {
    cfg.check_params(ALLOWED)?;
    if cfg.n != 1 {
        return Err(Error::Dimension { required: 1, actual: cfg.n });
    }
    let mut report = ExperimentReport::new("bv_convergence", &cfg.digest(), cfg.seed);
    let grid = cfg.frame_grid()?;
    let flux = cfg.flux_function()?;
    // The relaxed background (tau = 1) is the similarity fixed point;
    // starting there makes u - u_ss a pure deviation difference.
    let background = cfg.background()?.with_tau(1.0);
    let scheme = cfg.scheme();

    let t_final = cfg.param_f64("t_final", 100.0)?;
    let escape_radius = cfg.param_f64("escape_radius", 4.0)?;
    let decrease_fraction = cfg.param_f64("decrease_fraction", 0.05)?;
    let ds = cfg.param_f64("ds", 0.05)?;
    let data_kind = cfg.param_str("data", "bump")?;
    let half_width = cfg.param_f64("bump_half_width", 2.0)?;
    let height = cfg.param_f64("bump_height", 0.5)?;

    let v0: Vec<f64> = match data_kind.as_str() {
        "zero" => vec![0.0; grid.len()],
        "bump" => {
            let datum = data::mass_bump(0.0, half_width, height * half_width * 32.0 / 35.0);
            if datum.min_feature_width() < 4.0 * grid.spacing() {
                report.mark_inconclusive(format!(
                    "datum under-resolved: width {:.3} < 4 dx = {:.3}",
                    datum.min_feature_width(),
                    4.0 * grid.spacing()
                ));
                return Ok(report);
            }
            datum.sample(&grid)
        }
        other => return Err(Error::Config(format!("unknown data kind \"{other}\""))),
    };

    let pure = Field::new(grid, background.reference_values(&grid)?, Some(background.clone()))?;
    let opts = ProfileOptions {
        s_max: cfg.param_f64("profile_s_max", 40.0)?,
        ds,
        scheme,
        ..ProfileOptions::default()
    };
    let profile = compute_profile(&pure, &flux, &opts)?;
    report.record_constant("profile_residual", profile.residual);
    let vss = profile.field.deviation()?;

    let mut values = background.reference_values(&grid)?;
    for (u, v) in values.iter_mut().zip(&v0) {
        *u += v;
    }
    let mut state = Field::new(grid, values, Some(background.clone()))?.with_time(0.0);
    let tv0 = tv_norm(&state)?;
    report.record_constant("initial_tv", tv0);

    let times = dyadic_times(1.0, t_final);

    let vol = grid.cell_volume();
    let mut tv_diff = Vec::new();
    let mut tv_total = Vec::new();
    let mut escape = Vec::new();
    for &t in &times {
        if t > 1.0 {
            state = evolve_similarity(&state, &flux, t.ln(), ds, &scheme)?.field;
        }
        let dev = state.deviation()?;
        let diff: Vec<f64> = dev.iter().zip(&vss).map(|(a, b)| a - b).collect();
        tv_diff.push((t, in_box_tv(&diff)));
        tv_total.push((t, tv_norm(&state)?));
        // Frame mass of |u - u_ss| outside the fixed window |y| > radius.
        // The physical mass outside B(radius t) is t times this and tends
        // to the constant tail fraction of the datum's mass, so only the
        // frame-normalized quantity is required to vanish.  The dilation
        // seam wraps the far tail back into the window, where it settles
        // into a flat pedestal; reading that level off the outermost
        // strip and removing it keeps the diagnostic on genuine
        // transport instead of the truncation artifact.
        let strip = (grid.points() / 40).max(1);
        let pedestal = diff[..strip].iter().chain(&diff[grid.points() - strip..]).sum::<f64>()
            / (2 * strip) as f64;
        let out: f64 = (0..grid.points())
            .filter(|&i| grid.coord(i).abs() > escape_radius)
            .map(|i| (diff[i] - pedestal).abs() * vol)
            .sum();
        escape.push((t, out));
    }
    report.add_series("tv_diff", tv_diff.clone());
    report.add_series("tv_total", tv_total.clone());
    report.add_series("escaping_mass", escape.clone());

    let initial = tv_diff[0].1;
    let last = tv_diff.last().unwrap().1;
    if initial <= 1e-12 {
        report.record_check(
            "difference identically zero",
            last <= 1e-10,
            format!("TV(u - u_ss) stays at {last:.2e}"),
        );
        return Ok(report);
    }

    report.record_check(
        "tv difference decays",
        last <= decrease_fraction * initial,
        format!(
            "TV(u - u_ss): {initial:.4e} at t = 1 -> {last:.4e} at t = {t_final} \
             (target {decrease_fraction} of initial)"
        ),
    );

    let worst = tv_total.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
    report.record_check(
        "total variation never grows",
        worst <= tv0 + 1e-6,
        format!("max TV(u(t)) = {worst:.12e} vs TV(u_0) = {tv0:.12e}"),
    );

    let peak_escape = escape.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
    let final_escape = escape.last().unwrap().1;
    report.record_check(
        "no mass escaping to infinity",
        final_escape <= (0.05 * peak_escape).max(1e-7),
        format!("peak escaping mass {peak_escape:.4e}, final {final_escape:.4e}"),
    );
    Ok(report)
}
