//! Black–Scholes valuation with zero rates, implied volatility, Monte Carlo
//! smiles with confidence intervals, and Lee wing slopes.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::engine::PriceSample;
use crate::error::{Error, Result};
use crate::stats::{mean_and_se, ols_line, Z95};

/// Standard normal CDF, `½ erfc(−x/√2)`; relative accuracy holds in both
/// tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn intrinsic(s0: f64, strike: f64, is_call: bool) -> f64 {
    if is_call {
        (s0 - strike).max(0.0)
    } else {
        (strike - s0).max(0.0)
    }
}

/// Black–Scholes price with zero interest rate and dividend yield.
pub fn bs_price(s0: f64, strike: f64, t: f64, vol: f64, is_call: bool) -> f64 {
    let sd = vol * t.sqrt();
    if sd <= 0.0 {
        return intrinsic(s0, strike, is_call);
    }
    let d1 = (s0 / strike).ln() / sd + 0.5 * sd;
    let d2 = d1 - sd;
    if is_call {
        s0 * norm_cdf(d1) - strike * norm_cdf(d2)
    } else {
        strike * norm_cdf(-d2) - s0 * norm_cdf(-d1)
    }
}

/// `∂ price / ∂ vol`.
pub fn bs_vega(s0: f64, strike: f64, t: f64, vol: f64) -> f64 {
    let sd = vol * t.sqrt();
    if sd <= 0.0 {
        return 0.0;
    }
    let d1 = (s0 / strike).ln() / sd + 0.5 * sd;
    s0 * norm_pdf(d1) * t.sqrt()
}

/// Why an implied volatility could not be produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IvMissing {
    InvalidInput,
    BelowIntrinsic,
    /// The price equals intrinsic value: the zero-volatility boundary.
    AtIntrinsic,
    AtOrAboveUpperBound,
    NoConvergence,
}

impl std::fmt::Display for IvMissing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            IvMissing::InvalidInput => "invalid input",
            IvMissing::BelowIntrinsic => "price below intrinsic value",
            IvMissing::AtIntrinsic => "price at intrinsic value (zero volatility)",
            IvMissing::AtOrAboveUpperBound => "price at or above the no-arbitrage upper bound",
            IvMissing::NoConvergence => "root search did not converge",
        };
        f.write_str(s)
    }
}

const MAX_VOL: f64 = 1e3;

/// Inverts `bs_price`. The search runs on the out-of-the-money option (via
/// put-call parity) and on log-prices, so deep wings keep relative accuracy.
pub fn implied_vol(price: f64, s0: f64, strike: f64, t: f64, is_call: bool) -> Result<f64, IvMissing> {
    if !(price.is_finite() && s0 > 0.0 && strike > 0.0 && t > 0.0) || !s0.is_finite() || !strike.is_finite() {
        return Err(IvMissing::InvalidInput);
    }
    let intr = intrinsic(s0, strike, is_call);
    let upper = if is_call { s0 } else { strike };
    if price < intr {
        return Err(IvMissing::BelowIntrinsic);
    }
    if price >= upper {
        return Err(IvMissing::AtOrAboveUpperBound);
    }
    let otm_call = strike >= s0;
    let target = if otm_call == is_call {
        price
    } else if is_call {
        price - (s0 - strike)
    } else {
        price - (strike - s0)
    };
    if target <= 0.0 {
        return Err(IvMissing::AtIntrinsic);
    }
    let otm = |v: f64| bs_price(s0, strike, t, v, otm_call);
    let log_target = target.ln();

    let mut lo = 0.0;
    let mut hi = 1.0;
    while otm(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_VOL {
            return Err(IvMissing::NoConvergence);
        }
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..300 {
        let p = otm(v);
        let g = if p > 0.0 { p.ln() - log_target } else { f64::NEG_INFINITY };
        if g.abs() < 1e-14 {
            return Ok(v);
        }
        if g < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        if hi - lo <= 1e-15 * hi {
            return Ok(0.5 * (lo + hi));
        }
        let vega = bs_vega(s0, strike, t, v);
        let newton = if p > 0.0 && vega > 0.0 { v - g * p / vega } else { f64::NAN };
        v = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(IvMissing::NoConvergence)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmileRow {
    pub strike: f64,
    pub log_moneyness: f64,
    pub put_price: f64,
    pub put_price_se: f64,
    pub call_price: f64,
    pub call_price_se: f64,
    pub put_iv: Option<f64>,
    pub call_iv: Option<f64>,
    pub put_ci: Option<(f64, f64)>,
    pub call_ci: Option<(f64, f64)>,
    pub put_missing: Option<IvMissing>,
    pub call_missing: Option<IvMissing>,
    pub n_effective: usize,
}

impl SmileRow {
    /// Whether both intervals exist and intersect.
    pub fn cis_overlap(&self) -> Option<bool> {
        match (self.put_ci, self.call_ci) {
            (Some((pl, ph)), Some((cl, ch))) => Some(pl <= ch && cl <= ph),
            _ => None,
        }
    }
}

/// Implied vol of a Monte Carlo price with a CI from inverting the price
/// interval endpoints. Endpoints past the no-arbitrage bounds map to 0 and
/// infinity.
fn iv_with_ci(
    mean: f64,
    se: f64,
    s0: f64,
    strike: f64,
    t: f64,
    is_call: bool,
) -> (Option<f64>, Option<(f64, f64)>, Option<IvMissing>) {
    match implied_vol(mean, s0, strike, t, is_call) {
        Ok(iv) => {
            let lo = implied_vol(mean - Z95 * se, s0, strike, t, is_call).unwrap_or(0.0).min(iv);
            let hi = match implied_vol(mean + Z95 * se, s0, strike, t, is_call) {
                Ok(v) => v.max(iv),
                Err(_) => f64::INFINITY,
            };
            (Some(iv), Some((lo, hi)), None)
        }
        Err(why) => (None, None, Some(why)),
    }
}

/// Put and call smiles from terminal samples. Only valid samples are used.
pub fn smile_from_samples(samples: &[PriceSample], s0: f64, t: f64, strikes: &[f64]) -> Vec<SmileRow> {
    let prices: Vec<f64> = samples.iter().filter(|s| s.valid).map(|s| s.terminal_price).collect();
    let n = prices.len();
    let mut payoff = vec![0.0; n];
    strikes
        .iter()
        .map(|&k| {
            for (p, s) in payoff.iter_mut().zip(&prices) {
                *p = (k - s).max(0.0);
            }
            let (put_price, put_price_se) = mean_and_se(&payoff);
            for (p, s) in payoff.iter_mut().zip(&prices) {
                *p = (s - k).max(0.0);
            }
            let (call_price, call_price_se) = mean_and_se(&payoff);
            let (put_iv, put_ci, put_missing) = iv_with_ci(put_price, put_price_se, s0, k, t, false);
            let (call_iv, call_ci, call_missing) = iv_with_ci(call_price, call_price_se, s0, k, t, true);
            SmileRow {
                strike: k,
                log_moneyness: (k / s0).ln(),
                put_price,
                put_price_se,
                call_price,
                call_price_se,
                put_iv,
                call_iv,
                put_ci,
                call_ci,
                put_missing,
                call_missing,
                n_effective: n,
            }
        })
        .collect()
}

/// Smile CSV with empty fields for missing values.
pub fn smile_csv(rows: &[SmileRow]) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map(|x| format!("{x:.10}")).unwrap_or_default()
    }
    let mut out = String::from("strike,k,put_iv,put_lo,put_hi,call_iv,call_lo,call_hi,n_effective\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.10},{},{},{},{},{},{},{}\n",
            r.strike,
            r.log_moneyness,
            opt(r.put_iv),
            opt(r.put_ci.map(|c| c.0)),
            opt(r.put_ci.map(|c| c.1)),
            opt(r.call_iv),
            opt(r.call_ci.map(|c| c.0)),
            opt(r.call_ci.map(|c| c.1)),
            r.n_effective
        ));
    }
    out
}

/// Right-wing slope `β_R = 2(1−|ρ|)/(1+|ρ|)` and critical moment exponent
/// `p̄ = ρ²/(1−ρ²)` (infinite at `|ρ| = 1`).
pub fn theoretical_lee_slope(rho: f64) -> (f64, f64) {
    let a = rho.abs().min(1.0);
    let beta = 2.0 * (1.0 - a) / (1.0 + a);
    let p_bar = if a < 1.0 { rho * rho / (1.0 - rho * rho) } else { f64::INFINITY };
    (beta, p_bar)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WingReport {
    pub slope_hat: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub fit_range: (f64, f64),
    pub n_points: usize,
    pub rho: f64,
    pub beta_r: f64,
    pub p_bar: f64,
}

/// Least-squares slope of `σ_BS²(T,k)·T` against `k` on the call wing over
/// `fit_range`, paired with the theoretical slope for `rho`.
pub fn wing_slope(rows: &[SmileRow], t: f64, fit_range: (f64, f64), rho: f64) -> Result<WingReport> {
    let (k_lo, k_hi) = fit_range;
    if !(k_lo < k_hi) {
        return Err(Error::param("fit_range", "need k_lo < k_hi"));
    }
    let (ks, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.log_moneyness >= k_lo && r.log_moneyness <= k_hi)
        .filter_map(|r| r.call_iv.map(|v| (r.log_moneyness, v * v * t)))
        .unzip();
    if ks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable call-wing rows in [{k_lo}, {k_hi}], need 3",
            ks.len()
        )));
    }
    let (intercept, slope_hat, stderr) =
        ols_line(&ks, &ys).ok_or_else(|| Error::InsufficientData("degenerate moneyness grid".into()))?;
    let (beta_r, p_bar) = theoretical_lee_slope(rho);
    Ok(WingReport {
        slope_hat,
        intercept,
        stderr,
        fit_range,
        n_points: ks.len(),
        rho,
        beta_r,
        p_bar,
    })
}

/// Strikes `s0·e^k` for `k` evenly spaced on `[k_lo, k_hi]`.
pub fn strikes_from_log_moneyness(s0: f64, k_lo: f64, k_hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![s0 * k_lo.exp()];
    }
    (0..n)
        .map(|i| s0 * (k_lo + (k_hi - k_lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atm_call_example() {
        assert!((bs_price(100.0, 100.0, 1.0, 0.2, true) - 7.9656).abs() < 1e-4);
        assert_eq!(bs_price(100.0, 90.0, 1.0, 0.0, true), 10.0);
        let iv = implied_vol(7.9656, 100.0, 100.0, 1.0, true).unwrap();
        assert!((iv - 0.2).abs() < 1e-6);
    }

    #[test]
    fn missing_reasons() {
        assert_eq!(implied_vol(10.0, 100.0, 90.0, 1.0, true), Err(IvMissing::AtIntrinsic));
        assert_eq!(implied_vol(5.0, 100.0, 90.0, 1.0, true), Err(IvMissing::BelowIntrinsic));
        assert_eq!(implied_vol(100.0, 100.0, 90.0, 1.0, true), Err(IvMissing::AtOrAboveUpperBound));
        assert_eq!(implied_vol(0.0, 100.0, 120.0, 1.0, true), Err(IvMissing::AtIntrinsic));
    }

    #[test]
    fn lee_slopes() {
        let (b, p) = theoretical_lee_slope(-0.7);
        assert!((b - 0.35294).abs() < 1e-5 && (p - 0.96078).abs() < 1e-5);
        assert!((theoretical_lee_slope(-0.8).0 - 0.22222).abs() < 1e-5);
        assert_eq!(theoretical_lee_slope(1.0).0, 0.0);
        assert_eq!(theoretical_lee_slope(0.0).0, 2.0);
    }

    #[test]
    fn degenerate_samples() {
        let samples: Vec<PriceSample> = (0..10)
            .map(|i| PriceSample {
                terminal_price: 100.0,
                realized_variance: 0.0,
                path_seed: i,
                valid: true,
            })
            .collect();
        let rows = smile_from_samples(&samples, 100.0, 1.0, &[80.0, 100.0, 120.0]);
        assert_eq!(rows[1].call_price, 0.0);
        assert!(rows.iter().all(|r| r.call_iv.is_none() && r.put_iv.is_none()));
    }
}
