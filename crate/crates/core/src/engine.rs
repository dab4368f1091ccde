//! Monte Carlo engine for signature volatility models.
//!
//! One-factor model (alphabet `{1, 2}`, letter 2 is `W`):
//!
//! ```text
//! dS_t / S_t = σ_t dB_t,   σ_t = ⟨σ, 𝕎̂_t⟩,   d⟨B, W⟩_t = ρ dt
//! ```
//!
//! Multi-factor model (alphabet `{1, 2, ..., d+2}`, letter 2 is `B`, letters
//! `3..` are independent Brownian motions `Z`): `σ_t = ⟨σ, 𝕐̂_t⟩`.
//!
//! The signature state is advanced with one tensor exponential per step
//! (piecewise-linear lift), so it stays group-like along the whole path.
//! Log-prices use the left-point volatility.
//!
//! The signature-drift SDE `X = ρ ∫ ⟨σ, 𝕏̂_s⟩ ds + W` (and its multi-factor
//! analogue without `ρ`) explodes in finite time with positive probability
//! exactly when `S` is a strict local martingale. It is integrated with
//! adaptive sub-steps `h = min(δt, κ / (1 + |drift|))` and a path counts as
//! exploded once `|X|` reaches the cap.
//!
//! Every path draws from its own generator seeded by a hash of the master
//! seed and the path index, and results are collected in path order, so the
//! output does not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{rational_from_f64, shuffle, Letter, Rational, TensorPoly, Word};
use crate::error::{Error, Result};
use crate::signature::{expected_sig_time_bm, LinearForm, Scratch, TruncSig};
use crate::stats::{wilson_interval, Z95};

/// Sub-step scale of the adaptive drift integrator.
pub const KAPPA: f64 = 0.1;
/// Default explosion threshold for `|X|`.
pub const DEFAULT_X_CAP: f64 = 1e4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Volatility driven by the signature of `(t, W)`, `W` correlated with `B`.
    #[default]
    OneFactor,
    /// Volatility driven by the signature of `(t, B, Z¹, ..., Z^d)`.
    MultiFactor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(default)]
    pub kind: ModelKind,
    pub alphabet_dim: usize,
    pub order: usize,
    pub sigma: TensorPoly,
    #[serde(default)]
    pub rho: f64,
    pub s0: f64,
    pub horizon: f64,
}

impl ModelParams {
    pub fn one_factor(sigma: TensorPoly, rho: f64, s0: f64, horizon: f64) -> Result<Self> {
        let order = sigma.max_order();
        Self::new(ModelKind::OneFactor, order, sigma, rho, s0, horizon)
    }

    pub fn multi_factor(sigma: TensorPoly, s0: f64, horizon: f64) -> Result<Self> {
        let order = sigma.max_order();
        Self::new(ModelKind::MultiFactor, order, sigma, 0.0, s0, horizon)
    }

    pub fn new(kind: ModelKind, order: usize, sigma: TensorPoly, rho: f64, s0: f64, horizon: f64) -> Result<Self> {
        let p = ModelParams {
            kind,
            alphabet_dim: sigma.alphabet_dim(),
            order,
            sigma: sigma.with_max_order(order),
            rho,
            s0,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the invariants; also run after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.sigma.alphabet_dim() != self.alphabet_dim {
            return Err(Error::param(
                "sigma.alphabet_dim",
                format!("{} differs from model alphabet {}", self.sigma.alphabet_dim(), self.alphabet_dim),
            ));
        }
        match self.kind {
            ModelKind::OneFactor if self.alphabet_dim != 2 => {
                return Err(Error::param("alphabet_dim", "one-factor model uses the alphabet {1, 2}"))
            }
            ModelKind::MultiFactor if self.alphabet_dim < 2 => {
                return Err(Error::param("alphabet_dim", "multi-factor model needs at least {1, 2}"))
            }
            _ => {}
        }
        if self.sigma.max_order() > self.order {
            return Err(Error::param(
                "order",
                format!("sigma has words of length {} > order {}", self.sigma.max_order(), self.order),
            ));
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(Error::param("rho", "must lie in [-1, 1]"));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::param("s0", "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive"));
        }
        Ok(())
    }

    /// Coefficient of the word `2⋯2` of length `order`.
    pub fn leading_coefficient(&self) -> Rational {
        self.sigma.coeff(&Word::repeat(2, self.order))
    }

    pub fn extra_drivers(&self) -> usize {
        self.alphabet_dim - 2
    }

    fn sigma_form(&self) -> Result<LinearForm> {
        LinearForm::new(&self.sigma, self.order)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Steps per unit of model time.
    pub n_steps: usize,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub x_cap: f64,
    #[serde(default)]
    pub antithetic: bool,
    /// Thread-count hint; results never depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_cap() -> f64 {
    DEFAULT_X_CAP
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        SimConfig {
            n_paths,
            n_steps,
            seed,
            x_cap: DEFAULT_X_CAP,
            antithetic: false,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::param("n_paths", "must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        if !(self.x_cap > 0.0) || self.x_cap.is_infinite() {
            return Err(Error::param("x_cap", "must be positive and finite"));
        }
        Ok(())
    }

    /// Number of grid steps over `[0, horizon]`.
    pub fn total_steps(&self, horizon: f64) -> usize {
        ((self.n_steps as f64 * horizon).ceil() as usize).max(1)
    }

    /// Seed and increment sign for path `index`; antithetic pairs share a seed.
    pub fn path_seed(&self, index: usize) -> (u64, f64) {
        if self.antithetic {
            let sign = if index % 2 == 0 { 1.0 } else { -1.0 };
            (path_seed(self.seed, (index / 2) as u64), sign)
        } else {
            (path_seed(self.seed, index as u64), 1.0)
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-path seed derived from the master seed and the path index.
pub fn path_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Standard normal draws for one path, optionally sign-flipped.
pub struct NormalStream {
    rng: ChaCha8Rng,
    sign: f64,
}

impl NormalStream {
    pub fn new(path_seed: u64, sign: f64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(path_seed),
            sign,
        }
    }

    #[inline]
    pub fn next(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sign * z
    }
}

/// Maps `f` over `0..n` in index order, in parallel when enabled.
pub(crate) fn map_paths<T, F>(n: usize, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
        match workers {
            Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            },
            _ => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        (0..n).map(f).collect()
    }
}

/// Correlated increments `(dB, dW)` on a uniform grid of `n_steps` steps:
/// `dW = ρ dB + √(1-ρ²) dB^⊥`.
pub fn gen_drivers(rho: f64, horizon: f64, n_steps: usize, path_seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut normals = NormalStream::new(path_seed, 1.0);
    let sq = (horizon / n_steps as f64).sqrt();
    let rho_bar = (1.0 - rho * rho).max(0.0).sqrt();
    (0..n_steps)
        .map(|_| {
            let db = sq * normals.next();
            let dperp = sq * normals.next();
            (db, rho * db + rho_bar * dperp)
        })
        .unzip()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceSample {
    pub terminal_price: f64,
    /// `∫₀ᵀ σ_t² dt` along the path.
    pub realized_variance: f64,
    pub path_seed: u64,
    /// False when the state became non-finite.
    pub valid: bool,
}

fn price_path(params: &ModelParams, form: &LinearForm, steps: usize, seed: u64, sign: f64) -> PriceSample {
    let dim = params.alphabet_dim;
    let dt = params.horizon / steps as f64;
    let sq = dt.sqrt();
    let rho = params.rho;
    let rho_bar = (1.0 - rho * rho).max(0.0).sqrt();
    let mut normals = NormalStream::new(seed, sign);
    let mut sig = TruncSig::<f64>::identity(dim, params.order);
    let mut scratch = Scratch::default();
    let mut inc = vec![0.0; dim];
    inc[0] = dt;
    let mut log_s = 0.0;
    let mut rv = 0.0;
    for _ in 0..steps {
        let vol = form.eval(&sig);
        let db = sq * normals.next();
        match params.kind {
            ModelKind::OneFactor => {
                let dperp = sq * normals.next();
                inc[1] = rho * db + rho_bar * dperp;
            }
            ModelKind::MultiFactor => {
                inc[1] = db;
                for slot in inc.iter_mut().skip(2) {
                    *slot = sq * normals.next();
                }
            }
        }
        log_s += -0.5 * vol * vol * dt + vol * db;
        rv += vol * vol * dt;
        sig.mul_segment_with(&inc, &mut scratch);
    }
    let terminal_price = params.s0 * log_s.exp();
    let valid = terminal_price.is_finite() && rv.is_finite();
    PriceSample {
        terminal_price: if valid { terminal_price } else { f64::NAN },
        realized_variance: rv,
        path_seed: seed,
        valid,
    }
}

fn simulate_prices(params: &ModelParams, config: &SimConfig) -> Result<Vec<PriceSample>> {
    params.validate()?;
    config.validate()?;
    let form = params.sigma_form()?;
    let steps = config.total_steps(params.horizon);
    Ok(map_paths(config.n_paths, config.workers, |i| {
        let (seed, sign) = config.path_seed(i);
        price_path(params, &form, steps, seed, sign)
    }))
}

/// Terminal prices and realized variances of the one-factor model.
pub fn simulate_price_paths(params: &ModelParams, config: &SimConfig) -> Result<Vec<PriceSample>> {
    if params.kind != ModelKind::OneFactor {
        return Err(Error::param("kind", "expected the one-factor model"));
    }
    simulate_prices(params, config)
}

/// Terminal prices and realized variances of the multi-factor model.
pub fn simulate_price_paths_multid(params: &ModelParams, config: &SimConfig) -> Result<Vec<PriceSample>> {
    if params.kind != ModelKind::MultiFactor {
        return Err(Error::param("kind", "expected the multi-factor model"));
    }
    simulate_prices(params, config)
}

/// Dispatches on the model kind.
pub fn simulate_any(params: &ModelParams, config: &SimConfig) -> Result<Vec<PriceSample>> {
    simulate_prices(params, config)
}

/// `E[∫₀ᵀ σ_t² dt] = ⟨(σ ⧢ σ) 1, E[𝕎̂_T]⟩` via the expected signature.
pub fn expected_integrated_variance(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let sq = shuffle(&params.sigma, &params.sigma)?.concat_word(&Word::letter(1));
    let expected = expected_sig_time_bm(params.horizon, params.alphabet_dim - 1, sq.max_order());
    sq.bracket(&expected)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplosionStats {
    pub n_exploded: usize,
    pub n_paths: usize,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    pub cap_used: f64,
    /// Mean first time `|X|` reached the cap, over exploded paths.
    pub mean_exit_time: Option<f64>,
}

impl ExplosionStats {
    fn from_exit_times(exits: &[Option<f64>], cap: f64) -> Self {
        let n_paths = exits.len();
        let hit: Vec<f64> = exits.iter().flatten().copied().collect();
        let n_exploded = hit.len();
        let mean_exit_time = (n_exploded > 0).then(|| hit.iter().sum::<f64>() / n_exploded as f64);
        ExplosionStats {
            n_exploded,
            n_paths,
            p_hat: n_exploded as f64 / n_paths as f64,
            ci95: wilson_interval(n_exploded, n_paths, Z95),
            cap_used: cap,
            mean_exit_time,
        }
    }
}

/// Integrates one drift-SDE path and returns the first time `|X|` reaches
/// each cap (ascending), or `None` if it stays below until the horizon.
fn drift_path(
    params: &ModelParams,
    form: &LinearForm,
    steps: usize,
    caps: &[f64],
    seed: u64,
    sign: f64,
) -> (Vec<Option<f64>>, f64) {
    let dim = params.alphabet_dim;
    let factor = match params.kind {
        ModelKind::OneFactor => params.rho,
        ModelKind::MultiFactor => 1.0,
    };
    let dt = params.horizon / steps as f64;
    let mut normals = NormalStream::new(seed, sign);
    let mut sig = TruncSig::<f64>::identity(dim, params.order);
    let mut scratch = Scratch::default();
    let mut inc = vec![0.0; dim];
    let mut exits = vec![None; caps.len()];
    let mut next_cap = 0;
    let mut x = 0.0f64;
    let mut t = 0.0;
    for _ in 0..steps {
        let mut remaining = dt;
        while remaining > 0.0 {
            let drift = factor * form.eval(&sig);
            let h = remaining.min(KAPPA / (1.0 + drift.abs()));
            let sq = h.sqrt();
            inc[0] = h;
            inc[1] = drift * h + sq * normals.next();
            for slot in inc.iter_mut().skip(2) {
                *slot = sq * normals.next();
            }
            sig.mul_segment_with(&inc, &mut scratch);
            x += inc[1];
            t += h;
            remaining -= h;
            if remaining < 1e-15 * dt {
                remaining = 0.0;
            }
            while next_cap < caps.len() && !(x.abs() < caps[next_cap]) {
                exits[next_cap] = Some(t);
                next_cap += 1;
            }
            if next_cap == caps.len() {
                return (exits, f64::NAN);
            }
        }
    }
    (exits, x)
}

/// Explosion frequencies for several caps from one set of simulated paths.
pub fn simulate_drift_sde_caps(params: &ModelParams, config: &SimConfig, caps: &[f64]) -> Result<Vec<ExplosionStats>> {
    params.validate()?;
    config.validate()?;
    if caps.is_empty() || caps.windows(2).any(|c| c[1] <= c[0]) || caps.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::param("caps", "must be positive and strictly increasing"));
    }
    let form = params.sigma_form()?;
    let steps = config.total_steps(params.horizon);
    let exits = map_paths(config.n_paths, config.workers, |i| {
        let (seed, sign) = config.path_seed(i);
        drift_path(params, &form, steps, caps, seed, sign).0
    });
    Ok((0..caps.len())
        .map(|k| {
            let col: Vec<Option<f64>> = exits.iter().map(|e| e[k]).collect();
            ExplosionStats::from_exit_times(&col, caps[k])
        })
        .collect())
}

/// Explosion frequency of the signature-drift SDE with the configured cap.
/// Terminal values `X_T` of the drift SDE; `NaN` for paths that crossed
/// `x_cap`.
pub fn drift_sde_terminal_values(params: &ModelParams, config: &SimConfig) -> Result<Vec<f64>> {
    params.validate()?;
    config.validate()?;
    let form = params.sigma_form()?;
    let steps = config.total_steps(params.horizon);
    Ok(map_paths(config.n_paths, config.workers, |i| {
        let (seed, sign) = config.path_seed(i);
        drift_path(params, &form, steps, &[config.x_cap], seed, sign).1
    }))
}

pub fn simulate_drift_sde(params: &ModelParams, config: &SimConfig) -> Result<ExplosionStats> {
    Ok(simulate_drift_sde_caps(params, config, &[config.x_cap])?.remove(0))
}

/// Primary estimate plus the estimate with the cap doubled, from the same
/// paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplosionReport {
    pub stats: ExplosionStats,
    pub doubled_cap: ExplosionStats,
    /// `|p̂(2·cap) − p̂(cap)|`.
    pub cap_sensitivity: f64,
    pub base_step: f64,
    pub kappa: f64,
    pub seed: u64,
}

pub fn explosion_report(params: &ModelParams, config: &SimConfig) -> Result<ExplosionReport> {
    let mut both = simulate_drift_sde_caps(params, config, &[config.x_cap, 2.0 * config.x_cap])?;
    let doubled_cap = both.pop().expect("two caps");
    let stats = both.pop().expect("two caps");
    Ok(ExplosionReport {
        cap_sensitivity: (doubled_cap.p_hat - stats.p_hat).abs(),
        stats,
        doubled_cap,
        base_step: params.horizon / config.total_steps(params.horizon) as f64,
        kappa: KAPPA,
        seed: config.seed,
    })
}

/// Time for `ẋ = c·x^N` to travel from `a` to `b` (`0 < a < b ≤ ∞`).
pub fn ode_passage_time(c: f64, order: u32, a: f64, b: f64) -> Result<f64> {
    if order < 2 {
        return Err(Error::param("N", "linear or affine drift does not blow up (need N ≥ 2)"));
    }
    if !(c > 0.0) || !(a > 0.0) || !(b > a) {
        return Err(Error::param("c, a, b", "need c > 0 and 0 < a < b"));
    }
    let p = 1.0 - order as f64;
    Ok((a.powf(p) - b.powf(p)) / (c * (order as f64 - 1.0)))
}

/// Blow-up time of `ẋ = c·x^N` from `x0`: `x0^{1-N} / (c (N-1))`.
pub fn ode_blowup_time(c: f64, order: u32, x0: f64) -> Result<f64> {
    ode_passage_time(c, order, x0, f64::INFINITY)
}

/// Passage time from `n-1` to `n+1` of `ẋ = (σ/N!)·x^N`, where `σ` is the
/// leading coefficient: `(N!/((N-1)σ))·((n-1)^{1-N} − (n+1)^{1-N})`.
pub fn level_passage_time(leading: f64, order: u32, n: f64) -> Result<f64> {
    let fact: f64 = (1..=order).map(f64::from).product();
    ode_passage_time(leading / fact, order, n - 1.0, n + 1.0)
}

/// Coefficient vector per the smile/wing protocol: every word of length
/// `≤ order` over `{1, 2}` gets a uniform draw on `[-0.5, 0.5]` in
/// graded-lexicographic order, then the coefficient of `2⋯2` is set to
/// `leading`. Orders share their common prefix of draws.
pub fn random_sigma(order: usize, leading: f64, coef_seed: u64) -> Result<TensorPoly> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(coef_seed);
    let mut p = TensorPoly::zero(2).with_max_order(order);
    for len in 0..=order {
        for code in 0..(1usize << len) {
            let letters = (0..len).map(|k| 1 + ((code >> (len - 1 - k)) & 1) as u8).collect();
            let u: f64 = rng.random::<f64>() - 0.5;
            p.add_term(Word::new(letters), rational_from_f64(u)?);
        }
    }
    p.set_coeff(Word::repeat(2, order), rational_from_f64(leading)?);
    Ok(p)
}

/// Rewrites a one-factor `σ` over `(t, W)` as `σ̃` over `(t, B, B^⊥)` using
/// `W = ρB + √(1-ρ²)B^⊥`; letter 2 maps to `ρ·2 + ρ̄·3`.
pub fn embed_one_factor(sigma: &TensorPoly, rho: f64) -> Result<TensorPoly> {
    if sigma.alphabet_dim() != 2 {
        return Err(Error::param("sigma.alphabet_dim", "expected the alphabet {1, 2}"));
    }
    let r = rational_from_f64(rho)?;
    let rb = rational_from_f64((1.0 - rho * rho).max(0.0).sqrt())?;
    let mut out = TensorPoly::zero(3).with_max_order(sigma.max_order());
    for (w, c) in sigma.terms() {
        let mut partial: Vec<(Vec<u8>, Rational)> = vec![(Vec::new(), c.clone())];
        for &l in w.letters() {
            let images: Vec<(u8, &Rational)> = if l == 1 { vec![] } else { vec![(2, &r), (3, &rb)] };
            partial = if images.is_empty() {
                partial
                    .into_iter()
                    .map(|(mut ls, a)| {
                        ls.push(1);
                        (ls, a)
                    })
                    .collect()
            } else {
                partial
                    .iter()
                    .flat_map(|(ls, a)| {
                        images.iter().map(move |(nl, f)| {
                            let mut ls = ls.clone();
                            ls.push(*nl);
                            (ls, a * *f)
                        })
                    })
                    .collect()
            };
        }
        for (ls, a) in partial {
            out.add_term(Word::new(ls), a);
        }
    }
    Ok(out)
}

/// Letter of the volatility driver inside the one-factor alphabet.
pub const DRIVER: Letter = Letter(2);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{frac, int};
    use crate::stats::mean_and_se;

    fn sigma(terms: &[(&str, Rational)]) -> TensorPoly {
        TensorPoly::from_text_terms(2, terms).unwrap()
    }

    #[test]
    fn full_correlation_copies_the_driver() {
        let (db, dw) = gen_drivers(1.0, 1.0, 50, 7);
        assert_eq!(db, dw);
    }

    #[test]
    fn driver_correlation_statistics() {
        let n = 1_000_000;
        for rho in [0.0, -0.9] {
            let (db, dw) = gen_drivers(rho, 1.0, n, 11);
            let (sb, sw, sbw) = db.iter().zip(&dw).fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| {
                (a + x * x, b + y * y, c + x * y)
            });
            let corr = sbw / (sb * sw).sqrt();
            assert!((corr - rho).abs() < 4.0 / (n as f64).sqrt(), "rho {rho}: {corr}");
        }
    }

    #[test]
    fn drivers_reproducible_from_path_seed() {
        assert_eq!(gen_drivers(0.3, 2.0, 20, 99), gen_drivers(0.3, 2.0, 20, 99));
        assert_ne!(gen_drivers(0.3, 2.0, 20, 99), gen_drivers(0.3, 2.0, 20, 98));
    }

    #[test]
    fn zero_volatility_keeps_price_fixed() {
        let p = ModelParams::one_factor(TensorPoly::zero(2), 0.5, 100.0, 1.0).unwrap();
        let out = simulate_price_paths(&p, &SimConfig::new(50, 20, 1)).unwrap();
        assert!(out.iter().all(|s| s.terminal_price == 100.0 && s.realized_variance == 0.0));
    }

    #[test]
    fn constant_volatility_is_lognormal_martingale() {
        let p = ModelParams::one_factor(sigma(&[("", frac(1, 5))]), -0.4, 100.0, 1.0).unwrap();
        let out = simulate_price_paths(&p, &SimConfig::new(40_000, 10, 3)).unwrap();
        let prices: Vec<f64> = out.iter().map(|s| s.terminal_price).collect();
        let (m, se) = mean_and_se(&prices);
        assert!((m - 100.0).abs() < 4.0 * se, "{m} ± {se}");
        assert!(out.iter().all(|s| (s.realized_variance - 0.04).abs() < 1e-12));
    }

    #[test]
    fn expected_integrated_variance_examples() {
        let t = 1.7;
        let c = ModelParams::one_factor(sigma(&[("", int(3))]), 0.0, 1.0, t).unwrap();
        assert!((expected_integrated_variance(&c).unwrap() - 9.0 * t).abs() < 1e-12);
        let w = ModelParams::one_factor(sigma(&[("2", int(1))]), 0.0, 1.0, t).unwrap();
        assert!((expected_integrated_variance(&w).unwrap() - t * t / 2.0).abs() < 1e-12);
        let w2 = ModelParams::one_factor(sigma(&[("22", int(1))]), 0.0, 1.0, t).unwrap();
        assert!((expected_integrated_variance(&w2).unwrap() - t.powi(3) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        let s = sigma(&[("222", int(1))]);
        assert!(ModelParams::one_factor(s.clone(), 1.5, 1.0, 1.0).is_err());
        assert!(ModelParams::one_factor(s.clone(), 0.5, 0.0, 1.0).is_err());
        assert!(ModelParams::one_factor(s.clone(), 0.5, 1.0, -1.0).is_err());
        assert!(ModelParams::new(ModelKind::OneFactor, 2, s.clone(), 0.5, 1.0, 1.0).is_err());
        let p = ModelParams::new(ModelKind::OneFactor, 4, s, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(p.sigma.max_order(), 4);
        assert!(SimConfig::new(0, 1, 0).validate().is_err());
        assert!(SimConfig { x_cap: -1.0, ..SimConfig::new(1, 1, 0) }.validate().is_err());
    }

    #[test]
    fn drift_free_sde_never_explodes() {
        let p = ModelParams::one_factor(TensorPoly::zero(2), 0.5, 1.0, 1.0).unwrap();
        let s = simulate_drift_sde(&p, &SimConfig::new(500, 50, 2)).unwrap();
        assert_eq!(s.n_exploded, 0);
        assert_eq!(s.p_hat, 0.0);
        assert_eq!(s.mean_exit_time, None);
    }

    #[test]
    fn ode_blowup_examples() {
        assert!((ode_blowup_time(1.0, 3, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((ode_passage_time(1.0, 3, 2.0, 4.0).unwrap() - 3.0 / 32.0).abs() < 1e-15);
        assert!(ode_blowup_time(1.0, 3, 1e8).unwrap() < 1e-15);
        assert!(ode_blowup_time(1.0, 1, 1.0).is_err());
        // leading coefficient 6 on 222 gives ẋ = x³
        assert!((level_passage_time(6.0, 3, 3.0).unwrap() - 3.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn random_sigma_protocol() {
        let s4 = random_sigma(4, 1.0, 5).unwrap();
        let s5 = random_sigma(5, 1.0, 5).unwrap();
        assert_eq!(s4.coeff(&Word::repeat(2, 4)), int(1));
        assert_eq!(s5.coeff(&Word::repeat(2, 5)), int(1));
        for (w, c) in s4.terms() {
            if w.len() < 4 || *w != Word::repeat(2, 4) {
                assert_eq!(s5.coeff(w), *c, "{w}");
            }
            assert!(crate::algebra::rational_to_f64(c).abs() <= 1.0);
        }
        assert_eq!(s5.len(), 63);
    }

    #[test]
    fn embedding_leading_coefficient() {
        let s = sigma(&[("222", int(2)), ("21", int(1))]);
        let e = embed_one_factor(&s, 0.5).unwrap();
        assert_eq!(e.coeff(&Word::repeat(2, 3)), frac(1, 4));
        assert_eq!(e.coeff(&Word::parse("21").unwrap()), frac(1, 2));
    }
}
