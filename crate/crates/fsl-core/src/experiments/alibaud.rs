//! Controlled speed of propagation for local L^1 differences of entropy
//! solutions (Alibaud 2007): the difference mass seen in B(x0, R) at
//! time t is dominated by the kernel-smoothed initial difference over
//! the enlarged ball B(x0, R + L t).
//!
//! Both sides are computed in the same periodic discretization, so the
//! inequality tested is the discrete analogue of the estimate; the
//! tolerance carries an explicit Richardson-estimated O(dx) term.

use rand::Rng;
use rayon::prelude::*;

use crate::calculus::heat_semigroup;
use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::evolve::evolve_nonlinear;
use crate::experiments::report::ExperimentReport;
use crate::experiments::{ball_l1, data};
use crate::field::Field;
use crate::flux::{FluxComponent, FluxFunction};
use crate::grid::Grid;

const ALLOWED: &[&str] = &["pairs", "draws_per_time", "times", "zero_flux_control"];

#[derive(Clone, Copy)]
struct Draw {
    x0: f64,
    radius: f64,
}

/// One measured inequality instance.
struct Instance {
    label: String,
    lhs: f64,
    rhs: f64,
}

/// Evolves every pair and measures all (x0, R, t) instances on one grid.
/// draws is indexed [pair][time][draw].
fn measure(
    grid: &Grid,
    flux: &FluxFunction,
    cfg: &ResolvedConfig,
    suite: &[(data::SampleData, data::SampleData)],
    times: &[f64],
    draws: &[Vec<Vec<Draw>>],
    tag: &str,
) -> Result<(Vec<Instance>, f64)> {
    let background = cfg.background()?;
    let scheme = cfg.scheme();
    let phi = background.reference_values(grid)?;

    let per_pair: Vec<Result<Vec<Instance>>> = suite
        .par_iter()
        .zip(draws)
        .enumerate()
        .map(|(pair_idx, ((left, right), pair_draws))| {
            let make = |datum: &data::SampleData| -> Result<Field> {
                let mut values = phi.clone();
                for (u, x) in values.iter_mut().zip(datum.sample(grid)) {
                    *u += x;
                }
                Field::new(*grid, values, Some(background.clone()))
            };
            let mut u = make(left)?;
            let mut v = make(right)?;
            let (ulo, uhi) = u.value_range();
            let (vlo, vhi) = v.value_range();
            let m = ulo.abs().max(uhi.abs()).max(vlo.abs()).max(vhi.abs());
            let lipschitz = flux.lipschitz_on(m);

            let diff0: Vec<f64> =
                u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).collect();
            let diff0_field = Field::new(*grid, diff0, None)?;

            let mut out = Vec::new();
            for (t_idx, &t) in times.iter().enumerate() {
                u = evolve_nonlinear(&u, flux, t, &scheme)?.field;
                v = evolve_nonlinear(&v, flux, t, &scheme)?.field;
                let diff_t: Vec<f64> =
                    u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).collect();
                let smoothed = heat_semigroup(&diff0_field, t, 1.0, 0.0)?;
                for (d_idx, draw) in pair_draws[t_idx].iter().enumerate() {
                    let lhs = ball_l1(grid, &diff_t, draw.x0, draw.radius);
                    let rhs =
                        ball_l1(grid, smoothed.values(), draw.x0, draw.radius + lipschitz * t);
                    out.push(Instance {
                        label: format!(
                            "{tag}pair={pair_idx} t={t} x0={:.3} R={:.3} L={lipschitz:.3} draw={d_idx}",
                            draw.x0, draw.radius
                        ),
                        lhs,
                        rhs,
                    });
                }
            }
            Ok(out)
        })
        .collect();

    let mut instances = Vec::new();
    for chunk in per_pair {
        instances.extend(chunk?);
    }
    let worst = instances
        .iter()
        .map(|i| if i.rhs > 0.0 { i.lhs / i.rhs } else { 0.0 })
        .fold(0.0f64, f64::max);
    Ok((instances, worst))
}

pub fn run(cfg: &ResolvedConfig) -> Result<ExperimentReport> {
    cfg.check_params(ALLOWED)?;
    if cfg.n != 1 {
        return Err(Error::Dimension { required: 1, actual: cfg.n });
    }
    let mut report = ExperimentReport::new("alibaud_propagation", &cfg.digest(), cfg.seed);
    let fine = cfg.physical_grid()?;
    let coarse = Grid::new_1d(cfg.points / 2, cfg.half_width)?;
    let flux = cfg.flux_function()?;

    let pairs = cfg.param_usize("pairs", 5)?.max(1);
    let draws_per_time = cfg.param_usize("draws_per_time", 7)?.max(1);
    let times = cfg.param_f64_list("times", &[0.25, 0.5, 1.0])?;
    if times.iter().any(|&t| !(t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("times must be positive and increasing".into()));
    }
    let zero_control = cfg.param_str("zero_flux_control", "on")? == "on";

    // Data and draw positions are fixed up front so the fine and coarse
    // grids see the identical instance set.
    let extent = (cfg.half_width / 4.0).min(16.0);
    let mut rng = data::rng(cfg.seed);
    let suite: Vec<(data::SampleData, data::SampleData)> = (0..pairs)
        .map(|_| (data::random_mixture(&mut rng, extent), data::random_mixture(&mut rng, extent)))
        .collect();
    let draws: Vec<Vec<Vec<Draw>>> = (0..pairs)
        .map(|_| {
            times
                .iter()
                .map(|_| {
                    (0..draws_per_time)
                        .map(|_| Draw {
                            x0: rng.random_range(-extent..extent),
                            radius: rng.random_range(0.5..4.0),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let (fine_instances, worst_fine) = measure(&fine, &flux, cfg, &suite, &times, &draws, "")?;
    let (_, worst_coarse) = measure(&coarse, &flux, cfg, &suite, &times, &draws, "coarse ")?;

    // First-order Richardson estimate of the discretization constant.
    let kappa = ((worst_coarse - worst_fine) / (coarse.spacing() - fine.spacing())).max(0.0);
    let tol = 1e-3 + kappa * fine.spacing();
    report.record_constant("kappa", kappa);
    report.record_constant("tolerance", tol);
    report.record_constant("worst_ratio_fine", worst_fine);
    report.record_constant("worst_ratio_coarse", worst_coarse);
    report.record_constant("instances", fine_instances.len() as f64);
    report.record_check(
        "worst ratio stable under refinement",
        (worst_fine - worst_coarse).abs() <= 0.2 * worst_fine.max(worst_coarse).max(1e-9),
        format!("fine {worst_fine:.6} vs coarse {worst_coarse:.6}"),
    );

    for inst in &fine_instances {
        report.record_bound(&inst.label, inst.lhs, inst.rhs, tol);
    }

    // Identical data: both sides vanish.
    report.record_bound("identical data", 0.0, 0.0, tol);

    // Zero-flux control: L = 0, the balls coincide, and the estimate
    // reduces to the triangle inequality for the kernel convolution.
    if zero_control && !matches!(flux.component(0), FluxComponent::Zero) {
        let zero = FluxFunction::zero(1);
        let control = vec![(suite[0].0.clone(), suite[0].1.clone())];
        let control_draws = vec![draws[0].clone()];
        let (inst, w) = measure(&fine, &zero, cfg, &control, &times, &control_draws, "control ")?;
        for i in &inst {
            report.record_bound(&i.label, i.lhs, i.rhs, tol);
        }
        report.record_constant("zero_flux_worst_ratio", w);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::experiments::report::Verdict;

    /// Zero flux end to end: L = 0 and the estimate is the triangle
    /// inequality |P * w| <= P * |w| integrated over the same ball.
    #[test]
    fn zero_flux_triangle_inequality_holds() {
        let text = "experiment = \"alibaud_propagation\"\nflux = \"zero\"\na = 1.0\nN = 1024\n\
                    X = 32.5\nseed = 5\n[params]\npairs = 2\ndraws_per_time = 3\n\
                    times = [0.25, 1.0]\nzero_flux_control = \"off\"\n";
        let cfg = parse_config(text).unwrap();
        let mut report = run(&cfg).unwrap();
        report.finalize();
        assert_eq!(report.verdict, Verdict::Pass, "worst {:?}", report.worst_bound_ratio());
        assert!(report.worst_bound_ratio() <= 1.0 + 1e-6);
    }

    #[test]
    fn burgers_instances_all_pass() {
        let text = "experiment = \"alibaud_propagation\"\nflux = \"burgers\"\na = 1.0\nN = 1024\n\
                    X = 32.5\nseed = 9\n[params]\npairs = 2\ndraws_per_time = 2\ntimes = [0.5]\n";
        let cfg = parse_config(text).unwrap();
        let mut report = run(&cfg).unwrap();
        report.finalize();
        let failing: Vec<&String> =
            report.bounds.iter().filter(|b| !b.pass).map(|b| &b.name).collect();
        assert_eq!(report.verdict, Verdict::Pass, "failing instances: {failing:?}");
    }
}
