//! Run orchestration: executing a resolved configuration leaves a
//! self-contained, content-addressed directory under the output root.
//!
//! The directory name carries the config digest, so re-running an
//! identical configuration finds the finished report and recomputes
//! nothing; artifacts are staged in a scratch directory and renamed into
//! place, so a crash never leaves a half-written run that blocks later
//! attempts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::evolve::{evolve_nonlinear, SchemeConfig};
use crate::experiments::{data, run_experiment, write_series_dat, ExperimentReport};
use crate::field::{make_shock_data, Field};
use crate::snapshot::save_snapshot;

/// Where a run landed and what it concluded.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: ExperimentReport,
    /// True when the directory already held a finished report and the
    /// experiment was not recomputed.
    pub cached: bool,
}

/// Caps the global worker pool from the FSL_THREADS environment variable.
/// Call once at startup, before any parallel work; returns the applied
/// cap, or None when the variable is absent or the pool already exists.
pub fn apply_thread_cap() -> Option<usize> {
    let threads: usize = std::env::var("FSL_THREADS").ok()?.trim().parse().ok()?;
    if threads == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().ok()?;
    Some(threads)
}

pub fn execute(cfg: &ResolvedConfig) -> Result<RunOutcome> {
    let root = PathBuf::from(&cfg.output_dir);
    let final_dir = root.join(cfg.run_dir_name());
    if let Some(report) = load_finished(&final_dir)? {
        return Ok(RunOutcome { dir: final_dir, report, cached: true });
    }

    let started = Instant::now();
    let mut report = run_experiment(cfg)
        .map_err(|e| Error::Config(format!("experiment {}: {e}", cfg.experiment)))?;
    report.runtime_seconds = started.elapsed().as_secs_f64();

    let staging = root.join(format!(".{}.partial-{}", cfg.run_dir_name(), std::process::id()));
    std::fs::create_dir_all(&staging)?;
    let write_everything = (|| -> Result<()> {
        std::fs::write(staging.join("resolved-config.toml"), cfg.to_toml()?)?;
        report.write_json(&staging.join("report.json"))?;
        report.write_summary_csv(&staging.join("summary.csv"))?;
        if !report.series.is_empty() {
            let series_dir = staging.join("series");
            std::fs::create_dir_all(&series_dir)?;
            for series in &report.series {
                write_series_dat(series, &series_dir.join(format!("{}.dat", slug(&series.name))))?;
            }
        }
        write_trajectory_artifacts(cfg, &staging)?;
        Ok(())
    })();
    if let Err(e) = write_everything {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(e);
    }

    match std::fs::rename(&staging, &final_dir) {
        Ok(()) => Ok(RunOutcome { dir: final_dir, report, cached: false }),
        Err(rename_err) => {
            // lost a race to a concurrent identical run; its result stands
            let cached = load_finished(&final_dir);
            let _ = std::fs::remove_dir_all(&staging);
            match cached {
                Ok(Some(existing)) => {
                    Ok(RunOutcome { dir: final_dir, report: existing, cached: true })
                }
                _ => Err(Error::Config(format!(
                    "cannot move finished run into {}: {rename_err}",
                    final_dir.display()
                ))),
            }
        }
    }
}

/// Reads the report out of an existing run directory.  A directory
/// without a readable report is refused rather than overwritten.
fn load_finished(dir: &Path) -> Result<Option<ExperimentReport>> {
    if !dir.exists() {
        return Ok(None);
    }
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path).map_err(|e| {
        Error::Config(format!(
            "run directory {} exists but its report is unreadable ({e}); \
             move it aside to re-run",
            dir.display()
        ))
    })?;
    Ok(Some(ExperimentReport::from_json(&text)?))
}

/// A short physical-frame trajectory of the configured datum: initial and
/// final snapshots plus per-step diagnostics.  Kept to t = 1 so the cost
/// stays a sliver of any experiment; the seeded perturbation matches what
/// the verifiers draw.
fn write_trajectory_artifacts(cfg: &ResolvedConfig, dir: &Path) -> Result<()> {
    let grid = cfg.physical_grid()?;
    let field = if cfg.has_background() {
        let background = cfg.background()?;
        if cfg.n == 1 {
            let extent = (cfg.half_width / 4.0).min(16.0);
            let datum = data::random_mixture(&mut data::rng(cfg.seed), extent);
            let bump = move |p: &[f64]| 0.25 * datum.eval(p[0]);
            make_shock_data(grid, background, Some(&bump))?.0
        } else {
            make_shock_data(grid, background, None)?.0
        }
    } else {
        let extent = (cfg.half_width / 4.0).min(16.0);
        let datum = data::random_mixture(&mut data::rng(cfg.seed), extent);
        let values = datum.sample(&grid).iter().map(|v| 0.25 * v).collect();
        Field::new(grid, values, None)?
    };
    save_snapshot(&field, &dir.join("initial.fsl1"))?;

    let scheme = SchemeConfig { diagnostics_cadence: 1, ..cfg.scheme() };
    let out = evolve_nonlinear(&field, &cfg.flux_function()?, 1.0, &scheme)?;
    out.diagnostics.write_csv(&dir.join("diagnostics.csv"))?;
    save_snapshot(&out.field, &dir.join("final.fsl1"))?;
    Ok(())
}

/// File-system-safe series name: lowercase alphanumerics with single
/// underscores.
fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut gap = false;
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            if gap && !out.is_empty() {
                out.push('_');
            }
            gap = false;
            out.push(c.to_ascii_lowercase());
        } else {
            gap = true;
        }
    }
    if out.is_empty() {
        "series".into()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::experiments::Verdict;

    fn scratch_root(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("fsl-runner-tests").join(name);
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    fn small_config(root: &Path) -> ResolvedConfig {
        let text = format!(
            "experiment = \"bv_convergence\"\nflux = \"zero\"\na = 0.7\nN = 512\nX = 32.5\n\
             output_dir = \"{}\"\n[params]\ndata = \"zero\"\nt_final = 4.0\nprofile_s_max = 4.0\n",
            root.display()
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn run_directory_is_self_contained_and_cached() {
        let root = scratch_root("cache");
        let cfg = small_config(&root);
        let first = execute(&cfg).unwrap();
        assert!(!first.cached);
        assert_eq!(first.report.verdict, Verdict::Pass);
        for artifact in [
            "resolved-config.toml",
            "report.json",
            "summary.csv",
            "initial.fsl1",
            "final.fsl1",
            "diagnostics.csv",
        ] {
            assert!(first.dir.join(artifact).exists(), "missing {artifact}");
        }

        let before = std::fs::read_to_string(first.dir.join("report.json")).unwrap();
        let second = execute(&cfg).unwrap();
        assert!(second.cached);
        assert_eq!(second.dir, first.dir);
        let after = std::fs::read_to_string(first.dir.join("report.json")).unwrap();
        assert_eq!(before, after, "cached run must not rewrite artifacts");
        assert_eq!(second.report.verdict, first.report.verdict);
    }

    #[test]
    fn unreadable_existing_directory_is_refused() {
        let root = scratch_root("refuse");
        let cfg = small_config(&root);
        let dir = root.join(cfg.run_dir_name());
        std::fs::create_dir_all(&dir).unwrap();
        let err = execute(&cfg).unwrap_err();
        assert!(err.to_string().contains("move it aside"), "{err}");
    }

    #[test]
    fn series_files_land_for_reporting_experiments() {
        let root = scratch_root("series");
        let text = format!(
            "experiment = \"regularity_decay\"\nflux = \"zero\"\na = 1.0\nN = 256\nX = 16.5\n\
             seed = 3\noutput_dir = \"{}\"\n[params]\nt0 = 0.5\nsteps = 4\nperturbation = \"off\"\n",
            root.display()
        );
        let cfg = parse_config(&text).unwrap();
        let outcome = execute(&cfg).unwrap();
        let series_dir = outcome.dir.join("series");
        let entries: Vec<_> = std::fs::read_dir(&series_dir).unwrap().collect();
        assert_eq!(entries.len(), outcome.report.series.len());
        assert!(series_dir.join("t_sup_grad_u.dat").exists());
    }

    #[test]
    fn slugs_are_tame() {
        assert_eq!(slug("T^2 sup|grad^2 u|"), "t_2_sup_grad_2_u");
        assert_eq!(slug("ratio ell_inf L1 to Linf"), "ratio_ell_inf_l1_to_linf");
        assert_eq!(slug("***"), "series");
    }
}
