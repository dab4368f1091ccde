use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sigvol::experiments::{
    parse_config, run_critical, run_explode, run_moments, run_simulate, run_smile, run_wings, samples_csv,
    CriticalConfig, MomentsConfig, SimulateConfig, SmileConfig, WingsConfig,
};
use sigvol::pricing::smile_csv;
use sigvol::engine::SimConfig;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Experiment {
    Simulate {
        #[serde(default)]
        dump_samples: bool,
    },
    Smile,
    Explode,
    Moments,
    Critical,
    Wings,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Simulate { .. } => "simulate",
            Experiment::Smile => "smile",
            Experiment::Explode => "explode",
            Experiment::Moments => "moments",
            Experiment::Critical => "critical",
            Experiment::Wings => "wings",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub tool_version: String,
    /// Effective configuration, seed overrides applied.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub wall_clock_seconds: f64,
    /// File name to SHA-256 digest.
    pub outputs: BTreeMap<String, String>,
    #[serde(skip)]
    pub summary: String,
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn apply(sim: &mut SimConfig, seed: Option<u64>, workers: Option<usize>) {
    if let Some(s) = seed {
        sim.seed = s;
    }
    sim.workers = workers;
}

/// Echo of a config without the worker hint, so it never reaches result
/// files.
fn echo<T: Serialize>(config: &T) -> serde_json::Value {
    let mut v = serde_json::to_value(config).expect("serializable");
    if let Some(sim) = v.get_mut("sim").and_then(|s| s.as_object_mut()) {
        sim.remove("workers");
    }
    v
}

/// Runs one experiment, writes its result files and manifest into `out`.
pub fn run_experiment(
    kind: Experiment,
    config_text: &str,
    seed: Option<u64>,
    workers: Option<usize>,
    out: &Path,
) -> Result<Manifest, Failure> {
    let start = Instant::now();
    let mut files: Vec<(String, String)> = Vec::new();
    let name = kind.name();
    let (config, used_seed, summary) = match kind {
        Experiment::Simulate { dump_samples } => {
            let mut c: SimulateConfig = parse_config(config_text)?;
            apply(&mut c.sim, seed, workers);
            let (res, samples) = run_simulate(&c)?;
            let summary = format!(
                "gap {:.6} CI [{:.6}, {:.6}], {} invalid paths",
                res.gap.gap, res.gap.ci.0, res.gap.ci.1, res.n_invalid
            );
            files.push(("simulate.json".into(), json(&res)));
            if dump_samples {
                files.push(("samples.csv".into(), samples_csv(&samples)));
            }
            (echo(&c), Some(c.sim.seed), summary)
        }
        Experiment::Smile => {
            let mut c: SmileConfig = parse_config(config_text)?;
            apply(&mut c.sim, seed, workers);
            let res = run_smile(&c)?;
            let summary = format!(
                "gap {:.6} CI [{:.6}, {:.6}]; put/call intervals disjoint at {} of {} strikes",
                res.gap.gap, res.gap.ci.0, res.gap.ci.1, res.n_disjoint, res.n_compared
            );
            files.push(("smile.json".into(), json(&res)));
            files.push(("smile.csv".into(), smile_csv(&res.rows)));
            (echo(&c), Some(c.sim.seed), summary)
        }
        Experiment::Explode => {
            let mut c: SimulateConfig = parse_config(config_text)?;
            apply(&mut c.sim, seed, workers);
            let res = run_explode(&c)?;
            let s = &res.report.stats;
            let summary = format!(
                "exploded {} of {} (p = {:.5}, CI [{:.5}, {:.5}]); cap sensitivity {:.5}",
                s.n_exploded, s.n_paths, s.p_hat, s.ci95.0, s.ci95.1, res.report.cap_sensitivity
            );
            files.push(("explode.json".into(), json(&res)));
            (echo(&c), Some(c.sim.seed), summary)
        }
        Experiment::Moments => {
            let mut c: MomentsConfig = parse_config(config_text)?;
            apply(&mut c.sim, seed, workers);
            let res = run_moments(&c)?;
            let est = res.verdict.estimate.expect("estimate present");
            let summary = format!(
                "regime {:?} (threshold {:.6}); E[S^m] ≈ {:.6e}, largest-sample share {:.4}",
                res.verdict.regime, res.verdict.threshold, est.estimate, est.max_share
            );
            files.push(("moments.json".into(), json(&res)));
            (echo(&c), Some(c.sim.seed), summary)
        }
        Experiment::Critical => {
            let mut c: CriticalConfig = parse_config(config_text)?;
            if let Some(sim) = c.sim.as_mut() {
                apply(sim, seed, workers);
            }
            let res = run_critical(&c)?;
            let summary = format!(
                "verdict {:?}; λ² coefficient {:.6} ± {:.2e}, λ³ coefficient {:.6} ± {:.2e}; T* = {:.6}",
                res.verdict,
                res.coefficients[2],
                res.coefficient_se[2],
                res.coefficients[3],
                res.coefficient_se[3],
                res.t_star
            );
            files.push(("critical.json".into(), json(&res)));
            (echo(&c), c.sim.as_ref().map(|s| s.seed), summary)
        }
        Experiment::Wings => {
            let mut c: WingsConfig = parse_config(config_text)?;
            apply(&mut c.sim, seed, workers);
            let res = run_wings(&c)?;
            let summary = format!(
                "fitted slope {:.5} ± {:.5} over k in [{}, {}]; Lee slope {:.5}",
                res.report.slope_hat, res.report.stderr, res.report.fit_range.0, res.report.fit_range.1, res.report.beta_r
            );
            files.push(("wings.json".into(), json(&res)));
            files.push(("wings.csv".into(), smile_csv(&res.rows)));
            (echo(&c), Some(c.sim.seed), summary)
        }
    };

    std::fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let mut outputs = BTreeMap::new();
    for (file, body) in &files {
        let path = out.join(file);
        std::fs::write(&path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        outputs.insert(file.clone(), digest(body.as_bytes()));
    }
    let manifest = Manifest {
        experiment: kind,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        seed: used_seed,
        workers,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs,
        summary,
    };
    let path = out.join(format!("{name}.manifest.json"));
    std::fs::write(&path, json(&manifest)).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(manifest)
}
