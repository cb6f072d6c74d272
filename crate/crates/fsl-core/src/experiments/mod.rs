//! Desk-scale verifier experiments.
//!
//! Each verifier probes one estimate for the critical dissipative
//! conservation law (diffusive decay rates, propagation inequalities,
//! kernel bounds, ...) on a finite grid, and produces an
//! [`ExperimentReport`] with measured series, fitted exponents, and an
//! overall verdict.  Inequalities are only checked in the direction the
//! estimate claims, with an explicit discretization tolerance; best
//! constants observed are reported, never asserted sharp.

pub mod data;
pub mod report;

mod alibaud;
mod bv_convergence;
mod bv_formula;
mod decay_rates;
mod fundamental;
mod lipschitz;
mod localization;
mod regularity;
mod smoothing;

pub use report::{
    BoundCheck, Check, ExperimentReport, ExponentCheck, ObservedConstant, Series, Verdict,
    write_series_dat, REPORT_SCHEMA,
};

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Registry entry backing the list / describe commands.
pub struct ExperimentMeta {
    pub id: &'static str,
    pub aliases: &'static [&'static str],
    pub summary: &'static str,
    /// Published-literature anchor for the estimate being probed.
    pub reference: &'static str,
    pub inputs: &'static str,
    pub outputs: &'static str,
    pub estimate: &'static str,
}

pub const REGISTRY: &[ExperimentMeta] = &[
    ExperimentMeta {
        id: "decay_rates",
        aliases: &["verify_decay_rates"],
        summary: "diffusive L^p -> L^q decay rates toward the self-similar solution",
        reference: "Biler, Karch, Woyczynski, Ann. IHP 18 (2001); Karch, Miao, Xu, SIAM J. Math. Anal. 39 (2008)",
        inputs: "flux, far-field step, perturbation datum, (p, q) pairs, log-time grid",
        outputs: "norm-vs-time series, fitted log-log slope per (p, q), o(1)-ratio series",
        estimate: "||u - u_ss||_q = O(t^{n/q - n/p}) with o(1) factor for p > 1",
    },
    ExperimentMeta {
        id: "bv_convergence",
        aliases: &["verify_bv_convergence"],
        summary: "total-variation convergence toward the profile for BV perturbations",
        reference: "Karch, Miao, Xu, SIAM J. Math. Anal. 39 (2008); classical TVD theory",
        inputs: "flux, far-field step, BV perturbation",
        outputs: "TV(u - u_ss) on a dyadic time grid, global TV bound, escaping-mass diagnostic",
        estimate: "TV(u(t) - u_ss(t)) -> 0 while TV(u(t)) never exceeds TV(u_0)",
    },
    ExperimentMeta {
        id: "alibaud_propagation",
        aliases: &["verify_alibaud", "alibaud"],
        summary: "controlled speed of propagation for local L^1 differences",
        reference: "Alibaud, J. Evol. Equ. 7 (2007), entropy formulation for fractal conservation laws",
        inputs: "two data bounded by m, flux with Lipschitz constant L on [-m, m], random (x0, R, t) draws",
        outputs: "one inequality instance per draw with its lhs/rhs ratio",
        estimate: "int_{B(x0,R)} |u - v|(t) <= int_{B(x0,R+Lt)} P(t) * |u0 - v0|",
    },
    ExperimentMeta {
        id: "bv_formula",
        aliases: &["verify_bv_formula"],
        summary: "weighted variation bound along the flow",
        reference: "Alibaud, J. Evol. Equ. 7 (2007), weighted consequence of the propagation estimate",
        inputs: "BV datum, flux, moving weight, random (x0, t) draws",
        outputs: "weighted-integral inequality instances",
        estimate: "int psi(x-x0) |w(t)| <= int psi(x-x0, t) P(t) * |w0| for translation differences w",
    },
    ExperimentMeta {
        id: "smoothing_lemma",
        aliases: &["verify_smoothing_lemma"],
        summary: "short-time amalgam-space smoothing of the Poisson semigroup",
        reference: "classical semigroup estimates; Wiener-amalgam embeddings (Fournier, Stewart, Bull. AMS 13 (1985))",
        inputs: "(p, q1, q2) triples, seeded suite of bump/cube mixtures, dyadic t <= 1/2",
        outputs: "uniform ratio bound per triple, small-t exponent fit on worst datum",
        estimate: "||P(t) * w||_{l^p L^{q2}} <= C t^{n/q2 - n/q1} ||w||_{l^p L^{q1}}",
    },
    ExperimentMeta {
        id: "regularity_decay",
        aliases: &["verify_regularity_decay"],
        summary: "scaled interior regularity along shock-like evolutions",
        reference: "Kiselev, Nazarov, Shterenberg, Dyn. PDE 5 (2008); Droniou, Gallouet, Vovelle, J. Evol. Equ. 3 (2003)",
        inputs: "flux, shock-like datum, time window [t0, 100 t0]",
        outputs: "t ||grad u||_inf, t^2 ||grad^2 u||_inf, t^{2+alpha} [grad^2 u]_{C^alpha} series",
        estimate: "each scaled derivative series stays bounded over decades",
    },
    ExperimentMeta {
        id: "fundamental_bounds",
        aliases: &["verify_fundamental_bounds"],
        summary: "two-sided kernel bounds for the drift continuity equation",
        reference: "Bogdan, Jakubowski, Comm. Math. Phys. 271 (2007), heat-kernel estimates for the fractional Laplacian with drift",
        inputs: "drift field (zero, constant, or frozen from a nonlinear run), column centers, epsilon = 8 dx",
        outputs: "column mass/positivity checks, fitted comparison constant C0, representation check",
        estimate: "C0^{-1} P <= Gamma <= C0 P near the diagonal; unit column mass; superposition",
    },
    ExperimentMeta {
        id: "localization_smoothing",
        aliases: &["verify_localization_smoothing"],
        summary: "localization then smoothing for amalgam perturbations on t <= 1",
        reference: "Fournier, Stewart, Bull. AMS 13 (1985) for the spaces; semigroup smoothing as in Lemma-level estimates",
        inputs: "amalgam datum, flux, grid pair for refinement stability",
        outputs: "localization constant on t <= 1/2, smoothing constant on (3/4, 1], stability check",
        estimate: "||v(t)||_{l^p L^1} <= C ||v0||_{l^p L^1}; ||v(t)||_q <= C ||v(1/2)||_{l^p L^1}",
    },
    ExperimentMeta {
        id: "lipschitz_mode",
        aliases: &["verify_lipschitz_mode"],
        summary: "locally uniform convergence for merely Lipschitz fluxes",
        reference: "Alibaud, J. Evol. Equ. 7 (2007) for entropy solutions with Lipschitz flux",
        inputs: "kinked flux, far-field step, perturbation datum, windows |x| <= R t",
        outputs: "sup over B(Rt) of |u - u_ss| at dyadic t, per window radius",
        estimate: "sup_{B(Rt)} |u - u_ss| -> 0",
    },
];

pub fn find(id: &str) -> Option<&'static ExperimentMeta> {
    REGISTRY.iter().find(|m| m.id == id || m.aliases.contains(&id))
}

/// Dispatches to the verifier named by the configuration.
pub fn run_experiment(cfg: &ResolvedConfig) -> Result<ExperimentReport> {
    let meta =
        find(&cfg.experiment).ok_or_else(|| Error::UnknownExperiment(cfg.experiment.clone()))?;
    let mut report = match meta.id {
        "decay_rates" => decay_rates::run(cfg)?,
        "bv_convergence" => bv_convergence::run(cfg)?,
        "alibaud_propagation" => alibaud::run(cfg)?,
        "bv_formula" => bv_formula::run(cfg)?,
        "smoothing_lemma" => smoothing::run(cfg)?,
        "regularity_decay" => regularity::run(cfg)?,
        "fundamental_bounds" => fundamental::run(cfg)?,
        "localization_smoothing" => localization::run(cfg)?,
        "lipschitz_mode" => lipschitz::run(cfg)?,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    };
    report.finalize();
    Ok(report)
}

/// Geometric time grid with `count` points from t0 to t1 inclusive.
pub(crate) fn log_spaced(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    assert!(t0 > 0.0 && t1 > t0 && count >= 2);
    let ratio = (t1 / t0).ln() / (count - 1) as f64;
    (0..count).map(|k| t0 * (ratio * k as f64).exp()).collect()
}

/// t0, 2 t0, 4 t0, ... capped at t1, with t1 appended if missed.
pub(crate) fn dyadic_times(t0: f64, t1: f64) -> Vec<f64> {
    assert!(t0 > 0.0 && t1 > t0);
    let mut out = vec![t0];
    let mut t = t0;
    while t * 2.0 <= t1 * (1.0 + 1e-12) {
        t *= 2.0;
        out.push(t);
    }
    if (out.last().unwrap() - t1).abs() > 1e-12 * t1 {
        out.push(t1);
    }
    out
}

/// Midpoint-rule integral of |values| over the ball |x - center| <= radius.
pub(crate) fn ball_l1(grid: &Grid, values: &[f64], center: f64, radius: f64) -> f64 {
    let vol = grid.cell_volume();
    (0..grid.points())
        .filter(|&i| (grid.coord(i) - center).abs() <= radius)
        .map(|i| values[i].abs() * vol)
        .sum()
}

/// Points of a series falling inside [lo, hi] on the abscissa.
pub(crate) fn window(points: &[(f64, f64)], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(x, y) in points {
        if x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12) {
            xs.push(x);
            ys.push(y);
        }
    }
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_all_nine_with_aliases() {
        assert!(REGISTRY.len() >= 9);
        assert!(find("decay_rates").is_some());
        assert!(find("verify_alibaud").is_some());
        assert_eq!(find("verify_alibaud").unwrap().id, "alibaud_propagation");
        assert!(find("bogus").is_none());
        for meta in REGISTRY {
            assert!(!meta.reference.is_empty() && !meta.estimate.is_empty());
        }
    }

    #[test]
    fn time_grids() {
        let ts = dyadic_times(1.0, 100.0);
        assert_eq!(ts.first(), Some(&1.0));
        assert_eq!(ts.last(), Some(&100.0));
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        let ls = log_spaced(1.0, 100.0, 5);
        assert_eq!(ls.len(), 5);
        assert!((ls[2] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn ball_integral_counts_cells_inside() {
        let g = Grid::new_1d(64, 8.0).unwrap();
        let ones = vec![1.0; 64];
        let inside = ball_l1(&g, &ones, 0.0, 2.0);
        // 2 * radius / dx cells up to boundary rounding.
        assert!((inside - 4.0).abs() <= 2.0 * g.spacing() + 1e-12);
    }
}
