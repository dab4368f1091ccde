//! Browser bindings for the sigvol demo page.
//!
//! Each exported function returns a string (plain text or JSON) so the page
//! needs no extra glue. The same functions are callable from Rust through
//! the `*_json` and `*_text` variants, which is what the tests use.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sigvol::algebra::{shuffle, Letter, TensorPoly, Word};
use sigvol::diagnostics::{martingale_gap, martingality_predicate};
use sigvol::engine::{explosion_report, random_sigma, simulate_price_paths, ModelParams, SimConfig};
use sigvol::lyndon::{avoid_letter_decompose_in, radford_decompose, LyndonOrder};
use sigvol::pricing::{smile_from_samples, strikes_from_log_moneyness};

const MAX_PATHS: usize = 200_000;

fn dim_of(words: &[&Word]) -> usize {
    words.iter().map(|w| w.max_letter()).max().unwrap_or(1).max(2)
}

/// Shuffle product of two words, rendered.
pub fn shuffle_text(u: &str, v: &str) -> Result<String, String> {
    let a = Word::parse(u).map_err(|e| e.to_string())?;
    let b = Word::parse(v).map_err(|e| e.to_string())?;
    let d = dim_of(&[&a, &b]);
    shuffle(&TensorPoly::word(d, a), &TensorPoly::word(d, b))
        .map(|p| p.to_string())
        .map_err(|e| e.to_string())
}

/// Lyndon decomposition of a word; `avoid_letter = 0` uses the natural order.
pub fn decompose_text(word: &str, avoid_letter: u8) -> Result<String, String> {
    let w = Word::parse(word).map_err(|e| e.to_string())?;
    if w.is_empty() {
        return Err("enter a nonempty word".into());
    }
    let d = dim_of(&[&w]);
    let sp = if avoid_letter == 0 {
        radford_decompose(&w, &LyndonOrder::greater(d))
    } else {
        avoid_letter_decompose_in(&w, Letter(avoid_letter), d.max(avoid_letter as usize))
    };
    sp.map(|p| p.to_string()).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SmilePoint {
    k: f64,
    put_iv: Option<f64>,
    put_ci: Option<(f64, f64)>,
    call_iv: Option<f64>,
    call_ci: Option<(f64, f64)>,
}

#[derive(Serialize)]
struct SmileOut {
    predicted_martingale: bool,
    gap: f64,
    gap_ci: (f64, f64),
    points: Vec<SmilePoint>,
}

fn check_paths(n_paths: usize) -> Result<(), String> {
    if n_paths == 0 || n_paths > MAX_PATHS {
        Err(format!("paths must be between 1 and {MAX_PATHS}"))
    } else {
        Ok(())
    }
}

/// Put and call smiles for a random-coefficient model.
pub fn smile_json(order: usize, rho: f64, coef_seed: u64, n_paths: usize, n_steps: usize, seed: u64) -> Result<String, String> {
    check_paths(n_paths)?;
    let run = || -> sigvol::Result<SmileOut> {
        let params = ModelParams::one_factor(random_sigma(order, 1.0, coef_seed)?, rho, 1.0, 1.0)?;
        let samples = simulate_price_paths(&params, &SimConfig::new(n_paths, n_steps, seed))?;
        let gap = martingale_gap(&samples, 1.0)?;
        let strikes = strikes_from_log_moneyness(1.0, -0.6, 0.6, 25);
        let points = smile_from_samples(&samples, 1.0, 1.0, &strikes)
            .into_iter()
            .map(|r| SmilePoint {
                k: r.log_moneyness,
                put_iv: r.put_iv,
                put_ci: r.put_ci,
                call_iv: r.call_iv,
                call_ci: r.call_ci,
            })
            .collect();
        Ok(SmileOut {
            predicted_martingale: martingality_predicate(&params)?.predicted_martingale,
            gap: gap.gap,
            gap_ci: gap.ci,
            points,
        })
    };
    let out = run().map_err(|e| e.to_string())?;
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ExplosionOut {
    predicted_martingale: bool,
    n_exploded: usize,
    n_paths: usize,
    p_hat: f64,
    ci95: (f64, f64),
    mean_exit_time: Option<f64>,
    cap_sensitivity: f64,
}

/// Explosion frequency of the drift SDE for `σ = leading · 2⋯2`.
pub fn explosion_json(order: usize, rho: f64, leading: f64, n_paths: usize, seed: u64) -> Result<String, String> {
    check_paths(n_paths)?;
    let run = || -> sigvol::Result<ExplosionOut> {
        let mut sigma = TensorPoly::zero(2).with_max_order(order);
        sigma.add_term(Word::repeat(2, order), sigvol::algebra::rational_from_f64(leading)?);
        let params = ModelParams::new(sigvol::engine::ModelKind::OneFactor, order, sigma, rho, 1.0, 1.0)?;
        let mut config = SimConfig::new(n_paths, 200, seed);
        config.x_cap = 1e3;
        let r = explosion_report(&params, &config)?;
        Ok(ExplosionOut {
            predicted_martingale: martingality_predicate(&params)?.predicted_martingale,
            n_exploded: r.stats.n_exploded,
            n_paths: r.stats.n_paths,
            p_hat: r.stats.p_hat,
            ci95: r.stats.ci95,
            mean_exit_time: r.stats.mean_exit_time,
            cap_sensitivity: r.cap_sensitivity,
        })
    };
    let out = run().map_err(|e| e.to_string())?;
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn shuffle_words(u: &str, v: &str) -> Result<String, JsValue> {
    shuffle_text(u, v).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decompose(word: &str, avoid_letter: u8) -> Result<String, JsValue> {
    decompose_text(word, avoid_letter).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn smile(order: usize, rho: f64, coef_seed: u32, n_paths: usize, n_steps: usize, seed: u32) -> Result<String, JsValue> {
    smile_json(order, rho, coef_seed as u64, n_paths, n_steps, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn explosion(order: usize, rho: f64, leading: f64, n_paths: usize, seed: u32) -> Result<String, JsValue> {
    explosion_json(order, rho, leading, n_paths, seed as u64).map_err(|e| JsValue::from_str(&e))
}
