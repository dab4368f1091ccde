//! Experiment configurations and drivers shared by the command line tool
//! and the browser demo.
//!
//! A configuration is plain JSON. Models give `sigma` either explicitly as
//! a tensor polynomial or through the random-coefficient protocol:
//!
//! ```json
//! { "model": { "order": 5, "rho": -0.9, "s0": 1.0, "horizon": 1.0,
//!              "sigma_protocol": { "coef_seed": 1, "leading": 1.0 } },
//!   "sim": { "n_paths": 100000, "n_steps": 500, "seed": 42 } }
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::TensorPoly;
use crate::diagnostics::{
    critical_case_report, default_lambda_grid, martingale_gap, martingality_predicate, moment_estimate,
    moment_predicate, Control, CriticalCaseReport, CriticalSetup, Evaluation, GapEstimate, MartingaleVerdict,
    MomentVerdict,
};
use crate::engine::{
    expected_integrated_variance, explosion_report, random_sigma, simulate_any, ExplosionReport, ModelKind,
    ModelParams, PriceSample, SimConfig,
};
use crate::error::{Error, Result};
use crate::pricing::{smile_from_samples, strikes_from_log_moneyness, wing_slope, SmileRow, WingReport};
use crate::stats::{mean_and_se, Z95};

/// Random-coefficient protocol: uniform `[-0.5, 0.5]` coefficients from
/// `coef_seed`, leading coefficient fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaProtocol {
    pub coef_seed: u64,
    pub leading: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub kind: ModelKind,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<TensorPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_protocol: Option<SigmaProtocol>,
    #[serde(default)]
    pub rho: f64,
    pub s0: f64,
    pub horizon: f64,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ModelParams> {
        let sigma = match (&self.sigma, &self.sigma_protocol) {
            (Some(s), None) => {
                if s.max_order() > self.order {
                    return Err(Error::param(
                        "model.order",
                        format!("sigma has order {} but order is {}", s.max_order(), self.order),
                    ));
                }
                s.clone()
            }
            (None, Some(p)) => {
                if self.kind != ModelKind::OneFactor {
                    return Err(Error::param("model.sigma_protocol", "protocol draws a one-factor sigma"));
                }
                random_sigma(self.order, p.leading, p.coef_seed)?
            }
            _ => {
                return Err(Error::param(
                    "model.sigma",
                    "give exactly one of `sigma` and `sigma_protocol`",
                ))
            }
        };
        ModelParams::new(self.kind, self.order, sigma, self.rho, self.s0, self.horizon)
    }
}

/// Strikes as explicit values or an even grid in log-moneyness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StrikeSpec {
    List(Vec<f64>),
    LogMoneyness { k_lo: f64, k_hi: f64, n: usize },
}

impl StrikeSpec {
    pub fn strikes(&self, s0: f64) -> Result<Vec<f64>> {
        let out = match self {
            StrikeSpec::List(v) => v.clone(),
            StrikeSpec::LogMoneyness { k_lo, k_hi, n } => {
                if *n == 0 || !(k_lo <= k_hi) {
                    return Err(Error::param("strikes", "need n ≥ 1 and k_lo ≤ k_hi"));
                }
                strikes_from_log_moneyness(s0, *k_lo, *k_hi, *n)
            }
        };
        if out.is_empty() || out.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
            return Err(Error::param("strikes", "strikes must be positive"));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    pub sim: SimConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmileConfig {
    pub model: ModelSpec,
    pub sim: SimConfig,
    pub strikes: StrikeSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WingsConfig {
    pub model: ModelSpec,
    pub sim: SimConfig,
    pub strikes: StrikeSpec,
    pub fit_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub model: ModelSpec,
    pub sim: SimConfig,
    pub m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalConfig {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub m: f64,
    pub horizon: f64,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub control: Control,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    /// Monte Carlo settings; analytic evaluation when absent.
    #[serde(default)]
    pub sim: Option<SimConfig>,
}

/// Parses JSON, reporting the path of the offending field.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::param(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub realized_mean: f64,
    pub realized_se: f64,
    pub expected: f64,
    /// `(realized − expected) / se`.
    pub z_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub seed: u64,
    pub step_size: f64,
    pub n_paths: usize,
    pub n_invalid: usize,
    pub gap: GapEstimate,
    /// Absent when the leading coefficient vanishes.
    pub verdict: Option<MartingaleVerdict>,
    pub variance: Option<VarianceCheck>,
}

fn step_size(params: &ModelParams, sim: &SimConfig) -> f64 {
    params.horizon / sim.total_steps(params.horizon) as f64
}

fn variance_check(params: &ModelParams, samples: &[PriceSample]) -> Result<VarianceCheck> {
    let rv: Vec<f64> = samples.iter().filter(|s| s.valid).map(|s| s.realized_variance).collect();
    let (realized_mean, realized_se) = mean_and_se(&rv);
    let expected = expected_integrated_variance(params)?;
    Ok(VarianceCheck {
        realized_mean,
        realized_se,
        expected,
        z_score: (realized_mean - expected) / realized_se,
    })
}

fn check_finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} is not finite")))
    }
}

/// Simulates prices and reports the martingale gap and variance check.
pub fn run_simulate(config: &SimulateConfig) -> Result<(SimulateResult, Vec<PriceSample>)> {
    let params = config.model.build()?;
    let samples = simulate_any(&params, &config.sim)?;
    let gap = martingale_gap(&samples, params.s0)?;
    check_finite("martingale gap", gap.gap)?;
    let verdict = martingality_predicate(&params).ok().map(|v| v.with_gap(&gap));
    let variance = if params.order <= 6 {
        Some(variance_check(&params, &samples)?)
    } else {
        None
    };
    Ok((
        SimulateResult {
            seed: config.sim.seed,
            step_size: step_size(&params, &config.sim),
            n_paths: samples.len(),
            n_invalid: gap.n_invalid,
            gap,
            verdict,
            variance,
        },
        samples,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmileResult {
    pub seed: u64,
    pub step_size: f64,
    pub gap: GapEstimate,
    pub verdict: Option<MartingaleVerdict>,
    /// Strikes where both smiles have intervals.
    pub n_compared: usize,
    /// Strikes where those intervals are disjoint.
    pub n_disjoint: usize,
    pub rows: Vec<SmileRow>,
}

pub fn run_smile(config: &SmileConfig) -> Result<SmileResult> {
    let params = config.model.build()?;
    let strikes = config.strikes.strikes(params.s0)?;
    let samples = simulate_any(&params, &config.sim)?;
    let gap = martingale_gap(&samples, params.s0)?;
    check_finite("martingale gap", gap.gap)?;
    let rows = smile_from_samples(&samples, params.s0, params.horizon, &strikes);
    let compared: Vec<bool> = rows.iter().filter_map(|r| r.cis_overlap()).collect();
    Ok(SmileResult {
        seed: config.sim.seed,
        step_size: step_size(&params, &config.sim),
        verdict: martingality_predicate(&params).ok().map(|v| v.with_gap(&gap)),
        gap,
        n_compared: compared.len(),
        n_disjoint: compared.iter().filter(|o| !**o).count(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WingsResult {
    pub seed: u64,
    pub step_size: f64,
    pub report: WingReport,
    pub rows: Vec<SmileRow>,
}

pub fn run_wings(config: &WingsConfig) -> Result<WingsResult> {
    let params = config.model.build()?;
    let strikes = config.strikes.strikes(params.s0)?;
    let samples = simulate_any(&params, &config.sim)?;
    let rows = smile_from_samples(&samples, params.s0, params.horizon, &strikes);
    let report = wing_slope(&rows, params.horizon, config.fit_range, params.rho)?;
    check_finite("wing slope", report.slope_hat)?;
    Ok(WingsResult {
        seed: config.sim.seed,
        step_size: step_size(&params, &config.sim),
        report,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplodeResult {
    pub report: ExplosionReport,
    pub verdict: Option<MartingaleVerdict>,
    /// `s0 · p̂`: the martingale gap implied by the explosion frequency.
    pub implied_gap: f64,
    pub implied_gap_ci: (f64, f64),
}

pub fn run_explode(config: &SimulateConfig) -> Result<ExplodeResult> {
    let params = config.model.build()?;
    let report = explosion_report(&params, &config.sim)?;
    let s0 = params.s0;
    Ok(ExplodeResult {
        verdict: martingality_predicate(&params).ok(),
        implied_gap: s0 * report.stats.p_hat,
        implied_gap_ci: (s0 * report.stats.ci95.0, s0 * report.stats.ci95.1),
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsResult {
    pub seed: u64,
    pub verdict: MomentVerdict,
    pub ci95: (f64, f64),
}

pub fn run_moments(config: &MomentsConfig) -> Result<MomentsResult> {
    let params = config.model.build()?;
    let rho = match params.kind {
        ModelKind::OneFactor => params.rho,
        ModelKind::MultiFactor => 1.0,
    };
    let mut verdict = moment_predicate(rho, config.m)?;
    let samples = simulate_any(&params, &config.sim)?;
    let est = moment_estimate(&samples, config.m)?;
    check_finite("moment estimate", est.estimate)?;
    let ci95 = (est.estimate - Z95 * est.se, est.estimate + Z95 * est.se);
    verdict.estimate = Some(est);
    Ok(MomentsResult {
        seed: config.sim.seed,
        verdict,
        ci95,
    })
}

pub fn run_critical(config: &CriticalConfig) -> Result<CriticalCaseReport> {
    let setup = CriticalSetup {
        alpha: config.alpha,
        beta: config.beta,
        m: config.m,
        horizon: config.horizon,
        rho: config.rho,
        control: config.control,
    };
    let mode = match &config.sim {
        Some(sim) => Evaluation::MonteCarlo(sim.clone()),
        None => Evaluation::Analytic,
    };
    let report = critical_case_report(&setup, &config.lambda_grid, &mode)?;
    for c in report.coefficients {
        check_finite("critical-case coefficient", c)?;
    }
    Ok(report)
}

/// Single-column CSV of terminal prices; invalid paths are written as `nan`.
pub fn samples_csv(samples: &[PriceSample]) -> String {
    let mut out = String::from("terminal_price\n");
    for s in samples {
        if s.valid {
            out.push_str(&format!("{}\n", s.terminal_price));
        } else {
            out.push_str("nan\n");
        }
    }
    out
}
