//! Executable martingality and moment criteria.
//!
//! * [`martingality_predicate`]: the price is a true martingale iff `ρ = 0`,
//!   `N = 1`, or `N` is odd with `ρ σ^{2⊗N} ≤ 0` (multi-factor: `N` odd and
//!   `σ^{2⊗N} ≤ 0`).
//! * [`moment_predicate`]: `E[S_T^m]` is finite iff `|ρ| > √(1 − 1/m)`.
//! * [`critical_case_report`]: at `|ρ| = √(1 − 1/m)` the answer depends on a
//!   control problem; it is probed with deterministic controls `λψ`.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::algebra::{rational_to_f64, Letter, Rational};
use crate::engine::{map_paths, path_seed, ModelKind, ModelParams, NormalStream, PriceSample, SimConfig};
use crate::error::{Error, Result};
use crate::signature::TruncSig;
use crate::stats::{mean_and_se, Z95};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleReason {
    RhoZero,
    OrderOne,
    OddAndNonpositive,
    EvenOrder,
    PositiveProduct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    /// `s0 − mean(S_T)`.
    pub gap: f64,
    pub se: f64,
    pub ci: (f64, f64),
    pub n_valid: usize,
    pub n_invalid: usize,
}

impl GapEstimate {
    pub fn ci_contains_zero(&self) -> bool {
        self.ci.0 <= 0.0 && 0.0 <= self.ci.1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleVerdict {
    pub predicted_martingale: bool,
    pub reason: MartingaleReason,
    pub measured_gap: Option<f64>,
    pub gap_ci: Option<(f64, f64)>,
    /// Prediction agrees with whether the gap CI contains zero.
    pub consistent: Option<bool>,
}

impl MartingaleVerdict {
    pub fn with_gap(mut self, gap: &GapEstimate) -> Self {
        self.measured_gap = Some(gap.gap);
        self.gap_ci = Some(gap.ci);
        self.consistent = Some(self.predicted_martingale == gap.ci_contains_zero());
        self
    }
}

/// Classifies the model from its order, correlation and leading coefficient.
pub fn martingality_predicate(params: &ModelParams) -> Result<MartingaleVerdict> {
    params.validate()?;
    let lead = params.leading_coefficient();
    if lead == Rational::from_integer(0.into()) {
        return Err(Error::HypothesisViolated(format!(
            "leading coefficient of {} must be nonzero",
            crate::algebra::Word::repeat(2, params.order)
        )));
    }
    let n = params.order;
    let lead_sign = if lead.is_positive() { 1.0 } else { -1.0 };
    let (predicted, reason) = match params.kind {
        ModelKind::OneFactor if params.rho == 0.0 => (true, MartingaleReason::RhoZero),
        _ if n == 1 => (true, MartingaleReason::OrderOne),
        _ if n % 2 == 0 => (false, MartingaleReason::EvenOrder),
        ModelKind::OneFactor if params.rho * lead_sign <= 0.0 => (true, MartingaleReason::OddAndNonpositive),
        ModelKind::MultiFactor if lead_sign < 0.0 => (true, MartingaleReason::OddAndNonpositive),
        _ => (false, MartingaleReason::PositiveProduct),
    };
    Ok(MartingaleVerdict {
        predicted_martingale: predicted,
        reason,
        measured_gap: None,
        gap_ci: None,
        consistent: None,
    })
}

/// `s0 − mean(S_T)` with a 95% CI. Invalid paths are counted, not used.
pub fn martingale_gap(samples: &[PriceSample], s0: f64) -> Result<GapEstimate> {
    let prices: Vec<f64> = samples.iter().filter(|s| s.valid).map(|s| s.terminal_price).collect();
    if prices.is_empty() {
        return Err(Error::InsufficientData("no valid samples".into()));
    }
    let (mean, se) = mean_and_se(&prices);
    let se = if prices.len() == 1 { 0.0 } else { se };
    let gap = s0 - mean;
    Ok(GapEstimate {
        gap,
        se,
        ci: (gap - Z95 * se, gap + Z95 * se),
        n_valid: prices.len(),
        n_invalid: samples.len() - prices.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentRegime {
    Finite,
    Infinite,
    Critical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVerdict {
    pub m: f64,
    pub rho: f64,
    pub threshold: f64,
    pub regime: MomentRegime,
    pub estimate: Option<MomentEstimate>,
}

/// Regime of `E[S_T^m]` for `m > 1`: finite iff `|ρ| > √(1 − 1/m)`.
pub fn moment_predicate(rho: f64, m: f64) -> Result<MomentVerdict> {
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::param(
            "m",
            "the criterion covers m > 1; for m ≤ 1 the moment of a positive supermartingale is finite",
        ));
    }
    if !(rho.abs() <= 1.0) {
        return Err(Error::param("rho", "must lie in [-1, 1]"));
    }
    let bound = 1.0 - 1.0 / m;
    let threshold = bound.sqrt();
    let diff = rho * rho - bound;
    let regime = if diff.abs() <= 4.0 * f64::EPSILON * bound {
        MomentRegime::Critical
    } else if diff > 0.0 {
        MomentRegime::Finite
    } else {
        MomentRegime::Infinite
    };
    Ok(MomentVerdict {
        m,
        rho,
        threshold,
        regime,
        estimate: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub se: f64,
    /// Share of the estimate contributed by the largest sample.
    pub max_share: f64,
    pub n: usize,
    pub diverging: bool,
}

/// Sample mean of `S_T^m` and the tail-dominance share.
pub fn moment_estimate(samples: &[PriceSample], m: f64) -> Result<MomentEstimate> {
    if !(m > 0.0) {
        return Err(Error::param("m", "must be positive"));
    }
    let vals: Vec<f64> = samples
        .iter()
        .filter(|s| s.valid)
        .map(|s| s.terminal_price.powf(m))
        .collect();
    if vals.is_empty() {
        return Err(Error::InsufficientData("no valid samples".into()));
    }
    let (estimate, se) = mean_and_se(&vals);
    let total: f64 = vals.iter().sum();
    let largest = vals.iter().copied().fold(0.0, f64::max);
    let max_share = if total > 0.0 { largest / total } else { 0.0 };
    Ok(MomentEstimate {
        estimate,
        se,
        max_share,
        n: vals.len(),
        diverging: !estimate.is_finite() || max_share > 0.5,
    })
}

/// Sign of the instantaneous spot-volatility correlation,
/// `ρ · sign⟨σ{2}, 𝕎̂_t⟩`, where `σ{2}` strips a trailing letter 2.
pub fn spot_vol_correlation_sign(params: &ModelParams, sig_state: &TruncSig) -> Result<i8> {
    if params.kind != ModelKind::OneFactor {
        return Err(Error::param("kind", "defined for the one-factor model"));
    }
    let deriv = params.sigma.right_deconcat_by_letter(Letter(2));
    let v = deriv.bracket(sig_state)? * params.rho;
    Ok(if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    })
}

/// Deterministic control shape `ψ` with `ψ(0) = ψ(T) = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    /// `sin(πt/T)`.
    #[default]
    Sine,
    /// `4t(T−t)/T²`.
    Parabola,
}

impl Control {
    pub fn value(self, t: f64, horizon: f64) -> f64 {
        match self {
            Control::Sine => (std::f64::consts::PI * t / horizon).sin(),
            Control::Parabola => 4.0 * t * (horizon - t) / (horizon * horizon),
        }
    }

    pub fn derivative(self, t: f64, horizon: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Control::Sine => PI / horizon * (PI * t / horizon).cos(),
            Control::Parabola => 4.0 * (horizon - 2.0 * t) / (horizon * horizon),
        }
    }

    /// `(∫ψ'², ∫ψ², ∫tψ, ∫ψ³)` over `[0, T]`.
    pub fn integrals(self, horizon: f64) -> (f64, f64, f64, f64) {
        use std::f64::consts::PI;
        let t = horizon;
        match self {
            Control::Sine => (PI * PI / (2.0 * t), t / 2.0, t * t / PI, 4.0 * t / (3.0 * PI)),
            Control::Parabola => (16.0 / (3.0 * t), 8.0 * t / 15.0, t * t / 3.0, 16.0 * t / 35.0),
        }
    }
}

/// Parameters of the critical-case functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSetup {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub m: f64,
    pub horizon: f64,
    /// When given, must equal `±√(1 − 1/m)`.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub control: Control,
}

impl CriticalSetup {
    pub fn new(alpha: f64, beta: f64, m: f64, horizon: f64) -> Self {
        CriticalSetup {
            alpha,
            beta,
            m,
            horizon,
            rho: None,
            control: Control::Sine,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) {
            return Err(Error::param("m", "must exceed 1"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::param("alpha, beta", "must be finite"));
        }
        if let Some(rho) = self.rho {
            if moment_predicate(rho, self.m)?.regime != MomentRegime::Critical {
                return Err(Error::NotCritical { rho, m: self.m });
            }
        }
        Ok(())
    }

    /// `κ = √(m² − m)`.
    pub fn kappa(&self) -> f64 {
        (self.m * self.m - self.m).sqrt()
    }

    /// `T* = √(2π² / (ακ))`; infinite for `α ≤ 0`.
    pub fn t_star(&self) -> f64 {
        let ak = self.alpha * self.kappa();
        if ak > 0.0 {
            (2.0 * std::f64::consts::PI.powi(2) / ak).sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// Exact coefficients `[c0, c1, c2, c3]` of `J(λ)` for this control.
    pub fn analytic_coefficients(&self) -> [f64; 4] {
        let (dd, sq, tpsi, cube) = self.control.integrals(self.horizon);
        let k = self.kappa();
        let (a, b) = (self.alpha, self.beta);
        [
            0.0,
            b * k / 2.0 * tpsi,
            a * k / 4.0 * sq - 0.5 * dd,
            b * k / 2.0 * cube,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Evaluation {
    Analytic,
    MonteCarlo(SimConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub se: f64,
}

/// Per-path cubic coefficients of the functional on a Brownian path.
fn path_coefficients(setup: &CriticalSetup, steps: usize, seed: u64, sign: f64) -> [f64; 4] {
    let t_end = setup.horizon;
    let dt = t_end / steps as f64;
    let sq = dt.sqrt();
    let k = setup.kappa();
    let (a, b) = (setup.alpha, setup.beta);
    let psi = setup.control;
    let mut normals = NormalStream::new(seed, sign);

    // trapezoid sums of B², Bψ, ψ'², ψ² and of ψ' times the running
    // integrals of B², Bψ, ψ²
    let (mut i_bb, mut i_bp, mut i_dd, mut i_pp) = (0.0, 0.0, 0.0, 0.0);
    let (mut c_bb, mut c_bp, mut c_pp) = (0.0, 0.0, 0.0);
    let (mut o_bb, mut o_bp, mut o_pp) = (0.0, 0.0, 0.0);
    let mut x = 0.0f64;
    let mut p_prev = psi.value(0.0, t_end);
    let mut d_prev = psi.derivative(0.0, t_end);
    for i in 0..steps {
        let t1 = (i + 1) as f64 * dt;
        let x1 = x + sq * normals.next();
        let p1 = psi.value(t1, t_end);
        let d1 = psi.derivative(t1, t_end);
        let seg_bb = 0.5 * dt * (x * x + x1 * x1);
        let seg_bp = 0.5 * dt * (x * p_prev + x1 * p1);
        let seg_pp = 0.5 * dt * (p_prev * p_prev + p1 * p1);
        let (n_bb, n_bp, n_pp) = (c_bb + seg_bb, c_bp + seg_bp, c_pp + seg_pp);
        o_bb += 0.5 * dt * (d_prev * c_bb + d1 * n_bb);
        o_bp += 0.5 * dt * (d_prev * c_bp + d1 * n_bp);
        o_pp += 0.5 * dt * (d_prev * c_pp + d1 * n_pp);
        i_bb += seg_bb;
        i_bp += seg_bp;
        i_pp += seg_pp;
        i_dd += 0.5 * dt * (d_prev * d_prev + d1 * d1);
        (c_bb, c_bp, c_pp) = (n_bb, n_bp, n_pp);
        (x, p_prev, d_prev) = (x1, p1, d1);
    }
    // ψ(T) = 0, so (B_T + U_T)⁴ = B_T⁴
    [
        -a * k / 24.0 * x.powi(4) + a * k / 4.0 * i_bb,
        a * k / 2.0 * i_bp - b * k / 2.0 * o_bb,
        -0.5 * i_dd + a * k / 4.0 * i_pp - b * k * o_bp,
        -b * k / 2.0 * o_pp,
    ]
}

fn mc_coefficients(setup: &CriticalSetup, config: &SimConfig) -> Result<Vec<[f64; 4]>> {
    config.validate()?;
    let steps = config.total_steps(setup.horizon);
    Ok(map_paths(config.n_paths, config.workers, |i| {
        let (seed, sign) = config.path_seed(i);
        path_coefficients(setup, steps, seed, sign)
    }))
}

fn eval_cubic(c: &[f64; 4], l: f64) -> f64 {
    c[0] + l * (c[1] + l * (c[2] + l * c[3]))
}

/// `J(λ) = E[−½∫u² − (ακ/24)(B_T+U_T)⁴ + (ακ/4)∫(B+U)² − (βκ/2)∫(∫₀ᵗ(B+U)²ds)dU_t]`
/// with `U = λψ`.
pub fn critical_case_functional(setup: &CriticalSetup, lambda: f64, mode: &Evaluation) -> Result<FunctionalValue> {
    setup.validate()?;
    match mode {
        Evaluation::Analytic => Ok(FunctionalValue {
            value: eval_cubic(&setup.analytic_coefficients(), lambda),
            se: 0.0,
        }),
        Evaluation::MonteCarlo(config) => {
            let vals: Vec<f64> = mc_coefficients(setup, config)?
                .iter()
                .map(|c| eval_cubic(c, lambda))
                .collect();
            let (value, se) = mean_and_se(&vals);
            Ok(FunctionalValue { value, se })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalVerdict {
    Finite,
    InfiniteQuadratic,
    InfiniteCubic,
    CriticalUndetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCaseReport {
    pub setup: CriticalSetup,
    pub kappa: f64,
    pub t_star: f64,
    pub lambda_grid: Vec<f64>,
    pub values: Vec<FunctionalValue>,
    /// Fitted `[c0, c1, c2, c3]` and their standard errors.
    pub coefficients: [f64; 4],
    pub coefficient_se: [f64; 4],
    pub verdict: CriticalVerdict,
    pub seed: Option<u64>,
}

/// Default grid `λ ∈ {−3, …, 3}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-3..=3).map(f64::from).collect()
}

/// Least-squares cubic through `(λ_i, y_i)`.
fn fit_cubic(grid: &[f64], ys: &[f64]) -> Result<[f64; 4]> {
    let mut ata = [[0.0f64; 4]; 4];
    let mut aty = [0.0f64; 4];
    for (&l, &y) in grid.iter().zip(ys) {
        let row = [1.0, l, l * l, l * l * l];
        for i in 0..4 {
            aty[i] += row[i] * y;
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .expect("nonempty");
        if ata[piv][col].abs() < 1e-12 {
            return Err(Error::InsufficientData("λ grid needs at least 4 distinct points".into()));
        }
        ata.swap(col, piv);
        aty.swap(col, piv);
        for r in col + 1..4 {
            let f = ata[r][col] / ata[col][col];
            for c in col..4 {
                ata[r][c] -= f * ata[col][c];
            }
            aty[r] -= f * aty[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|c| ata[r][c] * x[c]).sum();
        x[r] = (aty[r] - s) / ata[r][r];
    }
    Ok(x)
}

/// Evaluates `J` on the grid, fits a cubic and classifies.
pub fn critical_case_report(setup: &CriticalSetup, lambda_grid: &[f64], mode: &Evaluation) -> Result<CriticalCaseReport> {
    setup.validate()?;
    let mut distinct = lambda_grid.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InsufficientData("λ grid needs at least 4 distinct points".into()));
    }
    let (values, coefficients, coefficient_se, seed) = match mode {
        Evaluation::Analytic => {
            let c = setup.analytic_coefficients();
            let values = lambda_grid
                .iter()
                .map(|&l| FunctionalValue {
                    value: eval_cubic(&c, l),
                    se: 0.0,
                })
                .collect::<Vec<_>>();
            let ys: Vec<f64> = values.iter().map(|v| v.value).collect();
            (values, fit_cubic(lambda_grid, &ys)?, [0.0; 4], None)
        }
        Evaluation::MonteCarlo(config) => {
            let per_path = mc_coefficients(setup, config)?;
            let values = lambda_grid
                .iter()
                .map(|&l| {
                    let v: Vec<f64> = per_path.iter().map(|c| eval_cubic(c, l)).collect();
                    let (value, se) = mean_and_se(&v);
                    FunctionalValue { value, se }
                })
                .collect::<Vec<_>>();
            let ys: Vec<f64> = values.iter().map(|v| v.value).collect();
            let coefficients = fit_cubic(lambda_grid, &ys)?;
            // the fit is linear in the data, so per-path fits give exact SEs
            let mut fitted: [Vec<f64>; 4] = Default::default();
            for c in &per_path {
                let ys: Vec<f64> = lambda_grid.iter().map(|&l| eval_cubic(c, l)).collect();
                let f = fit_cubic(lambda_grid, &ys)?;
                for i in 0..4 {
                    fitted[i].push(f[i]);
                }
            }
            let se = std::array::from_fn(|i| mean_and_se(&fitted[i]).1);
            (values, coefficients, se, Some(config.seed))
        }
    };
    let t_star = setup.t_star();
    let significant = |i: usize| coefficients[i].abs() > (4.0 * coefficient_se[i]).max(1e-9);
    let verdict = if setup.beta != 0.0 {
        if significant(3) {
            CriticalVerdict::InfiniteCubic
        } else {
            CriticalVerdict::CriticalUndetermined
        }
    } else if (setup.horizon - t_star).abs() <= 1e-12 * t_star || !significant(2) {
        CriticalVerdict::CriticalUndetermined
    } else if coefficients[2] < 0.0 {
        CriticalVerdict::Finite
    } else {
        CriticalVerdict::InfiniteQuadratic
    };
    Ok(CriticalCaseReport {
        setup: setup.clone(),
        kappa: setup.kappa(),
        t_star,
        lambda_grid: lambda_grid.to_vec(),
        values,
        coefficients,
        coefficient_se,
        verdict,
        seed,
    })
}

/// Numerical value of the leading coefficient.
pub fn leading_coefficient_f64(params: &ModelParams) -> f64 {
    rational_to_f64(&params.leading_coefficient())
}

/// Seed of the `index`-th independent replication of a master seed.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    path_seed(master.rotate_left(17) ^ 0xA076_1D64_78BD_642F, index)
}
