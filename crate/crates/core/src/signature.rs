//! Truncated signatures of piecewise-linear paths.
//!
//! A [`TruncSig`] stores levels `0..=N` densely; level `n` holds `d^n`
//! entries in row-major word order (letter `1` is digit 0, last letter
//! varies fastest). Straight segments contribute tensor exponentials
//! `exp(Δ) = Σ Δ^{⊗n}/n!` and are glued with Chen's identity
//! `S(X * Y) = S(X) ⊗ S(Y)`.
//!
//! The numeric routines are generic over the coefficient type so the same
//! code runs in `f64` and in exact rational arithmetic.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::algebra::{rational_to_f64, TensorPoly, Word};
use crate::error::{Error, Result};

/// Coefficient types usable in signature computations.
pub trait Scalar: Clone + Num + FromPrimitive + PartialOrd + Debug {}

impl<T: Clone + Num + FromPrimitive + PartialOrd + Debug> Scalar for T {}

/// Flat offset of level `n` inside the dense storage.
pub fn level_offset(dim: usize, n: usize) -> usize {
    (0..n).map(|k| dim.pow(k as u32)).sum()
}

/// Total number of entries of levels `0..=level`.
pub fn sig_len(dim: usize, level: usize) -> usize {
    level_offset(dim, level + 1)
}

/// Truncated signature, or any element of the truncated tensor algebra
/// whose level-0 entry is one.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSig<S = f64> {
    dim: usize,
    level: usize,
    data: Vec<S>,
}

impl<S: Scalar> TruncSig<S> {
    /// The signature of a constant path: `(1, 0, 0, ...)`.
    pub fn identity(dim: usize, level: usize) -> Self {
        let mut data = vec![S::zero(); sig_len(dim, level)];
        data[0] = S::one();
        TruncSig { dim, level, data }
    }

    pub(crate) fn from_raw(dim: usize, level: usize, data: Vec<S>) -> Self {
        debug_assert_eq!(data.len(), sig_len(dim, level));
        TruncSig { dim, level, data }
    }

    pub fn alphabet_dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    /// Level-`n` block of `d^n` entries.
    pub fn level_slice(&self, n: usize) -> &[S] {
        let start = level_offset(self.dim, n);
        &self.data[start..start + self.dim.pow(n as u32)]
    }

    /// Dense index of a word, or `None` if it is too long or uses letters
    /// outside the alphabet.
    pub fn flat_index(&self, w: &Word) -> Option<usize> {
        word_index(self.dim, self.level, w)
    }

    /// Entry at `w`.
    ///
    /// Panics if `w` is longer than the truncation level.
    pub fn get(&self, w: &Word) -> S {
        let idx = self
            .flat_index(w)
            .unwrap_or_else(|| panic!("word {w} outside signature (dim {}, level {})", self.dim, self.level));
        self.data[idx].clone()
    }

    pub fn try_get(&self, w: &Word) -> Option<S> {
        self.flat_index(w).map(|i| self.data[i].clone())
    }

    /// The word stored at dense index `idx`.
    pub fn word_at(&self, idx: usize) -> Word {
        let mut n = 0;
        while level_offset(self.dim, n + 1) <= idx {
            n += 1;
        }
        let mut rem = idx - level_offset(self.dim, n);
        let mut letters = vec![0u8; n];
        for slot in letters.iter_mut().rev() {
            *slot = (rem % self.dim) as u8 + 1;
            rem /= self.dim;
        }
        Word::new(letters)
    }

    /// All `(word, value)` pairs in graded-lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (Word, &S)> + '_ {
        self.data.iter().enumerate().map(|(i, v)| (self.word_at(i), v))
    }

    /// Tensor exponential of a straight segment with the given increment.
    pub fn segment(increment: &[S], level: usize) -> Self {
        let mut s = Self::identity(increment.len(), level);
        s.mul_segment(increment);
        s
    }

    /// In-place `self ⊗ exp(increment)`, evaluated level by level in
    /// Horner form from the top level down.
    pub fn mul_segment_with(&mut self, increment: &[S], buffers: &mut Scratch<S>) {
        let d = self.dim;
        debug_assert_eq!(increment.len(), d);
        let Scratch { cur, next: scratch } = buffers;
        for n in (1..=self.level).rev() {
            cur.clear();
            cur.push(self.data[0].clone());
            for j in 1..=n {
                let inv = S::one() / S::from_usize(n - j + 1).expect("small integer");
                let prev = d.pow(j as u32 - 1);
                let off = level_offset(d, j);
                scratch.clear();
                for i in 0..prev {
                    let t = cur[i].clone() * inv.clone();
                    for (a, x) in increment.iter().enumerate() {
                        scratch.push(self.data[off + i * d + a].clone() + t.clone() * x.clone());
                    }
                }
                if j == n {
                    self.data[off..off + prev * d].clone_from_slice(scratch);
                } else {
                    std::mem::swap(cur, scratch);
                }
            }
        }
    }

    pub fn mul_segment(&mut self, increment: &[S]) {
        let mut scratch = Scratch::default();
        self.mul_segment_with(increment, &mut scratch);
    }

    /// Applies `f` to every entry, keyed by its word.
    pub fn map_words<F: Fn(&Word, &S) -> S>(&self, f: F) -> Self {
        let data = self.entries().map(|(w, v)| f(&w, v)).collect();
        TruncSig::from_raw(self.dim, self.level, data)
    }
}

/// Reusable work buffers for [`TruncSig::mul_segment_with`].
#[derive(Clone, Debug)]
pub struct Scratch<S> {
    cur: Vec<S>,
    next: Vec<S>,
}

impl<S> Default for Scratch<S> {
    fn default() -> Self {
        Scratch {
            cur: Vec::new(),
            next: Vec::new(),
        }
    }
}

/// Dense index of `w` for signatures of shape `(dim, level)`.
pub fn word_index(dim: usize, level: usize, w: &Word) -> Option<usize> {
    if w.len() > level {
        return None;
    }
    let mut idx = 0usize;
    for &l in w.letters() {
        if l == 0 || l as usize > dim {
            return None;
        }
        idx = idx * dim + (l as usize - 1);
    }
    Some(level_offset(dim, w.len()) + idx)
}

/// Truncated tensor product of two flat tensors of the same shape.
fn tensor_mul<S: Scalar>(dim: usize, level: usize, a: &[S], b: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); sig_len(dim, level)];
    for n in 0..=level {
        let off_n = level_offset(dim, n);
        for k in 0..=n {
            let off_a = level_offset(dim, k);
            let off_b = level_offset(dim, n - k);
            let len_a = dim.pow(k as u32);
            let len_b = dim.pow((n - k) as u32);
            for i in 0..len_a {
                let x = &a[off_a + i];
                if x.is_zero() {
                    continue;
                }
                for j in 0..len_b {
                    let y = &b[off_b + j];
                    let slot = &mut out[off_n + i * len_b + j];
                    *slot = slot.clone() + x.clone() * y.clone();
                }
            }
        }
    }
    out
}

/// Chen product: level `n` of the result is `Σ_k a_k ⊗ b_{n-k}`.
pub fn chen_mul<S: Scalar>(a: &TruncSig<S>, b: &TruncSig<S>) -> Result<TruncSig<S>> {
    if a.dim != b.dim || a.level != b.level {
        return Err(Error::ShapeMismatch(a.dim, a.level, b.dim, b.level));
    }
    Ok(TruncSig::from_raw(a.dim, a.level, tensor_mul(a.dim, a.level, &a.data, &b.data)))
}

pub fn segment_sig<S: Scalar>(increment: &[S], level: usize) -> TruncSig<S> {
    TruncSig::segment(increment, level)
}

/// Sampled path: strictly increasing times and aligned points in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample<S = f64> {
    times: Vec<S>,
    points: Vec<Vec<S>>,
}

impl<S: Scalar> PathSample<S> {
    pub fn new(times: Vec<S>, points: Vec<Vec<S>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidPath("no sample points".into()));
        }
        if times.len() != points.len() {
            return Err(Error::InvalidPath(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::InvalidPath("zero-dimensional points".into()));
        }
        if let Some(k) = points.iter().position(|p| p.len() != d) {
            return Err(Error::InvalidPath(format!("point {k} has dimension {}", points[k].len())));
        }
        if let Some(k) = times.windows(2).position(|t| t[1] <= t[0]) {
            return Err(Error::NonIncreasingTimes(k + 1));
        }
        Ok(PathSample { times, points })
    }

    /// Prepends time as coordinate 1: points become `(t, x_1, ..., x_d)`.
    pub fn time_augmented(times: Vec<S>, values: Vec<Vec<S>>) -> Result<Self> {
        let points = times
            .iter()
            .zip(values)
            .map(|(t, mut v)| {
                v.insert(0, t.clone());
                v
            })
            .collect();
        Self::new(times, points)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<S>] {
        &self.points
    }

    /// Concatenation: `other` is translated so it starts where `self` ends,
    /// and its times are shifted to follow on.
    pub fn join(&self, other: &PathSample<S>) -> Result<PathSample<S>> {
        let last_t = self.times.last().cloned().expect("nonempty");
        let last_p = self.points.last().cloned().expect("nonempty");
        let t0 = other.times[0].clone();
        let p0 = other.points[0].clone();
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        for (t, p) in other.times.iter().zip(&other.points).skip(1) {
            times.push(last_t.clone() + (t.clone() - t0.clone()));
            points.push(
                p.iter()
                    .zip(&p0)
                    .zip(&last_p)
                    .map(|((x, x0), y)| y.clone() + (x.clone() - x0.clone()))
                    .collect(),
            );
        }
        PathSample::new(times, points)
    }
}

/// Signature of the piecewise-linear interpolation of `path`.
pub fn path_signature<S: Scalar>(path: &PathSample<S>, level: usize) -> Result<TruncSig<S>> {
    let d = path.dim();
    let mut sig = TruncSig::identity(d, level);
    let mut scratch = Scratch::default();
    let mut inc = vec![S::zero(); d];
    for pair in path.points.windows(2) {
        for (slot, (b, a)) in inc.iter_mut().zip(pair[1].iter().zip(&pair[0])) {
            *slot = b.clone() - a.clone();
        }
        sig.mul_segment_with(&inc, &mut scratch);
    }
    Ok(sig)
}

/// Multiplies coordinate `coord` (1-based) by `c` at every sample.
pub fn scale_coordinate<S: Scalar>(path: &PathSample<S>, coord: usize, c: S) -> Result<PathSample<S>> {
    if coord == 0 || coord > path.dim() {
        return Err(Error::param("coord", format!("must lie in 1..={}", path.dim())));
    }
    let points = path
        .points
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p[coord - 1] = p[coord - 1].clone() * c.clone();
            p
        })
        .collect();
    Ok(PathSample {
        times: path.times.clone(),
        points,
    })
}

/// Expected signature at time `t` of `(s, W^1_s, ..., W^b_s)` with `W` a
/// standard `b`-dimensional Brownian motion, in the Stratonovich sense:
/// the truncated exponential of `t·(e_1 + ½ Σ_{i≥2} e_i ⊗ e_i)`.
pub fn expected_sig_time_bm(t: f64, bm_dim: usize, level: usize) -> TruncSig<f64> {
    let dim = bm_dim + 1;
    let len = sig_len(dim, level);
    let mut gen = vec![0.0; len];
    if level >= 1 {
        gen[level_offset(dim, 1)] = t;
    }
    if level >= 2 {
        let off = level_offset(dim, 2);
        for i in 1..dim {
            gen[off + i * dim + i] = 0.5 * t;
        }
    }
    // exp(g) = Σ_k g^k / k!, g has no level-0 part so k ≤ level suffices
    let mut out = vec![0.0; len];
    out[0] = 1.0;
    let mut term = out.clone();
    for k in 1..=level {
        term = tensor_mul(dim, level, &term, &gen);
        let inv = 1.0 / k as f64;
        term.iter_mut().for_each(|x| *x *= inv);
        out.iter_mut().zip(&term).for_each(|(o, x)| *o += x);
    }
    TruncSig::from_raw(dim, level, out)
}

/// A polynomial compiled against the dense layout of one signature shape.
#[derive(Clone, Debug)]
pub struct LinearForm {
    dim: usize,
    level: usize,
    terms: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn new(p: &TensorPoly, level: usize) -> Result<Self> {
        if level < p.max_order() {
            return Err(Error::InsufficientDepth {
                needed: p.max_order(),
                have: level,
            });
        }
        let terms = p
            .terms()
            .map(|(w, c)| {
                let idx = word_index(p.alphabet_dim(), level, w)
                    .ok_or_else(|| Error::LetterOutOfRange { letter: w.max_letter(), dim: p.alphabet_dim() })?;
                Ok((idx, rational_to_f64(c)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearForm {
            dim: p.alphabet_dim(),
            level,
            terms,
        })
    }

    pub fn eval(&self, s: &TruncSig<f64>) -> f64 {
        debug_assert_eq!((s.dim, s.level), (self.dim, self.level));
        self.terms.iter().map(|&(i, c)| c * s.data[i]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// JSON form of a float signature: nonzero entries in graded-lex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncSigJson {
    pub alphabet_dim: usize,
    pub level: usize,
    pub entries: Vec<SigEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigEntry {
    pub word: String,
    pub value: f64,
}

impl TruncSig<f64> {
    pub fn to_json(&self) -> TruncSigJson {
        TruncSigJson {
            alphabet_dim: self.dim,
            level: self.level,
            entries: self
                .entries()
                .filter(|(_, v)| **v != 0.0)
                .map(|(w, v)| SigEntry {
                    word: w.to_text(self.dim),
                    value: *v,
                })
                .collect(),
        }
    }
}
