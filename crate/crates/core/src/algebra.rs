//! Free tensor algebra over a finite alphabet with the shuffle product.
//!
//! Words index the coordinates of the tensor algebra; a [`TensorPoly`] is a
//! finite linear combination of words with exact rational coefficients.
//! Letter `1` always denotes the time coordinate of a time-augmented path.
//!
//! The shuffle product is defined on words by
//!
//! ```text
//! (v i) ⧢ (w j) = (v ⧢ w j) i + (v i ⧢ w) j,     w ⧢ ø = ø ⧢ w = w
//! ```
//!
//! and extended bilinearly. Pairing a polynomial with a signature,
//! `⟨ℓ, 𝕏⟩ = Σ ℓ^w 𝕏^w`, is the only place where coefficients leave exact
//! arithmetic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::TruncSig;

/// Exact coefficient field of the algebra.
pub type Rational = BigRational;

/// Converts an exactly representable float into a rational without rounding.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::Numerical(format!("non-finite coefficient {x}")))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A single letter `1..=d` of the alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub const TIME: Letter = Letter(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite word over the alphabet; the empty word `ø` has length zero.
///
/// Words order graded-lexicographically: first by length, then letter by
/// letter.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn letter(l: u8) -> Self {
        Word(vec![l])
    }

    /// The word `l l ... l` of length `n`.
    pub fn repeat(l: u8, n: usize) -> Self {
        Word(vec![l; n])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().map(|&l| Letter(l))
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// Checks every letter lies in `1..=dim`.
    pub fn check_alphabet(&self, dim: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l as usize > dim) {
            Some(&l) => Err(Error::LetterOutOfRange { letter: l as usize, dim }),
            None => Ok(()),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l.0);
    }

    /// Number of occurrences of `l`.
    pub fn count_letter(&self, l: Letter) -> usize {
        self.0.iter().filter(|&&x| x == l.0).count()
    }

    /// Text form: digit string when every letter is a single digit, dotted
    /// indices otherwise. The empty word renders as `ø`.
    pub fn to_text(&self, alphabet_dim: usize) -> String {
        if self.is_empty() {
            return String::new();
        }
        if alphabet_dim <= 9 {
            self.0.iter().map(|l| char::from(b'0' + l)).collect()
        } else {
            self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(".")
        }
    }

    /// Parses a digit string (`"221"`) or dotted indices (`"1.2.10"`).
    /// The empty string and `ø` both denote the empty word.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "ø" {
            return Ok(Word::empty());
        }
        let bad = || Error::MalformedWord(s.to_string());
        if s.contains('.') {
            s.split('.')
                .map(|part| part.parse::<u8>().ok().filter(|&l| l > 0).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()
                .map(Word)
        } else {
            s.chars()
                .map(|c| match c.to_digit(10) {
                    Some(d) if d > 0 => Ok(d as u8),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>>>()
                .map(Word)
        }
    }

    pub fn parse_in(s: &str, alphabet_dim: usize) -> Result<Word> {
        let w = Word::parse(s)?;
        w.check_alphabet(alphabet_dim)?;
        Ok(w)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ø")
        } else {
            f.write_str(&self.to_text(self.max_letter()))
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

impl From<&[u8]> for Word {
    fn from(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }
}

pub fn concat(w: &Word, v: &Word) -> Word {
    w.concat(v)
}

pub fn count_letter(w: &Word, l: Letter) -> usize {
    w.count_letter(l)
}

/// Sparse element of the truncated tensor algebra with exact coefficients.
#[derive(Clone, Debug)]
pub struct TensorPoly {
    alphabet_dim: usize,
    max_order: usize,
    terms: BTreeMap<Word, Rational>,
}

impl PartialEq for TensorPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for TensorPoly {}

impl TensorPoly {
    pub fn zero(alphabet_dim: usize) -> Self {
        TensorPoly {
            alphabet_dim,
            max_order: 0,
            terms: BTreeMap::new(),
        }
    }

    /// The empty word with coefficient one, the shuffle unit.
    pub fn unit(alphabet_dim: usize) -> Self {
        Self::word(alphabet_dim, Word::empty())
    }

    pub fn word(alphabet_dim: usize, w: Word) -> Self {
        Self::monomial(alphabet_dim, w, Rational::one())
    }

    pub fn monomial(alphabet_dim: usize, w: Word, c: Rational) -> Self {
        let mut p = Self::zero(alphabet_dim);
        p.add_term(w, c);
        p
    }

    /// Builds from `(word, coefficient)` pairs, validating letters.
    pub fn from_terms<I>(alphabet_dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, Rational)>,
    {
        let mut p = Self::zero(alphabet_dim);
        for (w, c) in terms {
            w.check_alphabet(alphabet_dim)?;
            p.add_term(w, c);
        }
        Ok(p)
    }

    /// Convenience parser for `(text, coefficient)` pairs.
    pub fn from_text_terms(alphabet_dim: usize, terms: &[(&str, Rational)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(s, c)| Word::parse_in(s, alphabet_dim).map(|w| (w, c.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(alphabet_dim, parsed)
    }

    /// Raises the declared truncation order; never lowers it below the
    /// longest stored word.
    pub fn with_max_order(mut self, order: usize) -> Self {
        self.max_order = self.max_order.max(order);
        self
    }

    pub fn alphabet_dim(&self) -> usize {
        self.alphabet_dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c·w`, dropping the entry if the coefficient cancels.
    pub fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        self.max_order = self.max_order.max(w.len());
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn set_coeff(&mut self, w: Word, c: Rational) {
        self.terms.remove(&w);
        self.add_term(w, c);
    }

    pub fn add_scaled(&mut self, other: &TensorPoly, c: &Rational) {
        for (w, a) in &other.terms {
            self.add_term(w.clone(), a * c);
        }
        self.max_order = self.max_order.max(other.max_order);
    }

    pub fn scaled(&self, c: &Rational) -> TensorPoly {
        let mut out = TensorPoly::zero(self.alphabet_dim).with_max_order(self.max_order);
        out.add_scaled(self, c);
        out
    }

    pub fn add(&self, other: &TensorPoly) -> Result<TensorPoly> {
        self.same_alphabet(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        Ok(out)
    }

    pub fn sub(&self, other: &TensorPoly) -> Result<TensorPoly> {
        self.same_alphabet(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        Ok(out)
    }

    fn same_alphabet(&self, other: &TensorPoly) -> Result<()> {
        if self.alphabet_dim == other.alphabet_dim {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(self.alphabet_dim, other.alphabet_dim))
        }
    }

    /// Right concatenation `p·v` applied termwise.
    pub fn concat_word(&self, v: &Word) -> TensorPoly {
        let mut out = TensorPoly::zero(self.alphabet_dim).with_max_order(self.max_order + v.len());
        for (w, c) in &self.terms {
            out.add_term(w.concat(v), c.clone());
        }
        out
    }

    /// `Σ p^{v i} v`: keeps the words ending in `i` and strips that letter.
    pub fn right_deconcat_by_letter(&self, i: Letter) -> TensorPoly {
        let mut out = TensorPoly::zero(self.alphabet_dim).with_max_order(self.max_order.saturating_sub(1));
        for (w, c) in &self.terms {
            if w.last() == Some(i) {
                out.add_term(Word(w.0[..w.len() - 1].to_vec()), c.clone());
            }
        }
        out
    }

    /// Sum of all coefficients.
    pub fn coefficient_sum(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c)
    }

    /// Coefficients as floats, in graded-lexicographic word order.
    pub fn to_f64_terms(&self) -> Vec<(Word, f64)> {
        self.terms.iter().map(|(w, c)| (w.clone(), rational_to_f64(c))).collect()
    }

    /// Pairs the polynomial with a truncated signature.
    pub fn bracket(&self, s: &TruncSig) -> Result<f64> {
        bracket(self, s)
    }

    pub fn to_json(&self) -> TensorPolyJson {
        TensorPolyJson {
            alphabet_dim: self.alphabet_dim,
            max_order: Some(self.max_order),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermJson {
                    word: w.to_text(self.alphabet_dim),
                    num: BigIntJson::from_bigint(c.numer()),
                    den: BigIntJson::from_bigint(c.denom()),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &TensorPolyJson) -> Result<TensorPoly> {
        let mut p = TensorPoly::zero(json.alphabet_dim);
        for (k, term) in json.terms.iter().enumerate() {
            let w = Word::parse_in(&term.word, json.alphabet_dim)?;
            let den = term.den.to_bigint(&format!("terms[{k}].den"))?;
            if den.is_zero() {
                return Err(Error::param(format!("terms[{k}].den"), "zero denominator"));
            }
            let num = term.num.to_bigint(&format!("terms[{k}].num"))?;
            p.add_term(w, BigRational::new(num, den));
        }
        if let Some(order) = json.max_order {
            if order < p.max_order {
                return Err(Error::param("max_order", "smaller than the longest word"));
            }
            p.max_order = order;
        }
        Ok(p)
    }
}

/// JSON form `{ "alphabet_dim": d, "terms": [{"word": "221", "num": 3, "den": 10}] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorPolyJson {
    pub alphabet_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub word: String,
    pub num: BigIntJson,
    #[serde(default = "BigIntJson::one")]
    pub den: BigIntJson,
}

/// Integers that fit in `i64` serialize as JSON numbers, larger ones as
/// decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigIntJson {
    Small(i64),
    Big(String),
}

impl BigIntJson {
    fn one() -> Self {
        BigIntJson::Small(1)
    }

    fn from_bigint(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) => BigIntJson::Small(v),
            None => BigIntJson::Big(n.to_string()),
        }
    }

    fn to_bigint(&self, field: &str) -> Result<BigInt> {
        match self {
            BigIntJson::Small(v) => Ok(BigInt::from(*v)),
            BigIntJson::Big(s) => s.parse().map_err(|_| Error::param(field, format!("not an integer: {s}"))),
        }
    }
}

impl Serialize for TensorPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TensorPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = TensorPolyJson::deserialize(deserializer)?;
        TensorPoly::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Writes `c·` in front of a term; returns the sign separately.
pub(crate) fn coeff_prefix(c: &Rational) -> (bool, String) {
    let neg = c.is_negative();
    let a = c.abs();
    let body = if a.is_one() {
        String::new()
    } else if a.is_integer() {
        format!("{}·", a.numer())
    } else {
        format!("{}/{}·", a.numer(), a.denom())
    };
    (neg, body)
}

/// Joins signed terms with ` + ` / ` − `.
pub(crate) fn join_signed(parts: impl IntoIterator<Item = (bool, String)>) -> String {
    let mut out = String::new();
    for (k, (neg, body)) in parts.into_iter().enumerate() {
        match (k, neg) {
            (0, false) => {}
            (0, true) => out.push('−'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" − "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for TensorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.terms.iter().map(|(w, c)| {
            let (neg, prefix) = coeff_prefix(c);
            let word = if w.is_empty() {
                "ø".to_string()
            } else {
                w.to_text(self.alphabet_dim)
            };
            (neg, format!("{prefix}{word}"))
        });
        f.write_str(&join_signed(parts))
    }
}

/// Integer multiplicities of `v ⧢ w`, built with the defining recursion on
/// the last letters.
fn shuffle_counts(v: &[u8], w: &[u8]) -> HashMap<Vec<u8>, u64> {
    // row[j] holds v[..i] ⧢ w[..j] for the current i
    let mut row: Vec<HashMap<Vec<u8>, u64>> = Vec::with_capacity(w.len() + 1);
    let mut base = HashMap::new();
    base.insert(Vec::new(), 1u64);
    row.push(base);
    for j in 1..=w.len() {
        let mut m = HashMap::new();
        m.insert(w[..j].to_vec(), 1u64);
        row.push(m);
    }
    for i in 1..=v.len() {
        let mut next: Vec<HashMap<Vec<u8>, u64>> = Vec::with_capacity(w.len() + 1);
        let mut first = HashMap::new();
        first.insert(v[..i].to_vec(), 1u64);
        next.push(first);
        for j in 1..=w.len() {
            let mut m: HashMap<Vec<u8>, u64> = HashMap::new();
            // (v[..i-1] ⧢ w[..j]) v_i
            for (word, c) in &row[j] {
                let mut x = word.clone();
                x.push(v[i - 1]);
                *m.entry(x).or_default() += c;
            }
            // (v[..i] ⧢ w[..j-1]) w_j
            for (word, c) in &next[j - 1] {
                let mut x = word.clone();
                x.push(w[j - 1]);
                *m.entry(x).or_default() += c;
            }
            next.push(m);
        }
        row = next;
    }
    row.pop().unwrap_or_default()
}

/// Shuffle product of two words.
pub fn shuffle_words(alphabet_dim: usize, v: &Word, w: &Word) -> TensorPoly {
    let mut out = TensorPoly::zero(alphabet_dim).with_max_order(v.len() + w.len());
    for (word, c) in shuffle_counts(v.letters(), w.letters()) {
        out.add_term(Word(word), BigRational::from_integer(BigInt::from(c)));
    }
    out
}

/// Bilinear shuffle product of two polynomials.
pub fn shuffle(p: &TensorPoly, q: &TensorPoly) -> Result<TensorPoly> {
    p.same_alphabet(q)?;
    let mut acc: BTreeMap<Word, Rational> = BTreeMap::new();
    for (v, a) in &p.terms {
        for (w, b) in &q.terms {
            let ab = a * b;
            for (word, c) in shuffle_counts(v.letters(), w.letters()) {
                let term = &ab * BigRational::from_integer(BigInt::from(c));
                *acc.entry(Word(word)).or_insert_with(Rational::zero) += term;
            }
        }
    }
    acc.retain(|_, c| !c.is_zero());
    Ok(TensorPoly {
        alphabet_dim: p.alphabet_dim,
        max_order: p.max_order + q.max_order,
        terms: acc,
    })
}

/// `k`-fold shuffle power; `k = 0` gives the unit `ø`.
pub fn shuffle_pow(p: &TensorPoly, k: u32) -> TensorPoly {
    let mut out = TensorPoly::unit(p.alphabet_dim);
    for _ in 0..k {
        out = shuffle(&out, p).expect("same alphabet");
    }
    out
}

pub fn right_deconcat_by_letter(p: &TensorPoly, i: Letter) -> TensorPoly {
    p.right_deconcat_by_letter(i)
}

/// `⟨p, s⟩ = Σ_w p^w s^w` as a float.
pub fn bracket(p: &TensorPoly, s: &TruncSig) -> Result<f64> {
    if p.alphabet_dim != s.alphabet_dim() {
        return Err(Error::AlphabetMismatch(p.alphabet_dim, s.alphabet_dim()));
    }
    if s.level() < p.max_order {
        return Err(Error::InsufficientDepth {
            needed: p.max_order,
            have: s.level(),
        });
    }
    Ok(p.terms.iter().map(|(w, c)| rational_to_f64(c) * s.get(w)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn poly(d: usize, terms: &[(&str, i64)]) -> TensorPoly {
        let t: Vec<_> = terms.iter().map(|(s, c)| (*s, int(*c))).collect();
        TensorPoly::from_text_terms(d, &t).unwrap()
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&w("21"), &w("1")), w("211"));
        assert_eq!(concat(&Word::empty(), &w("21")), w("21"));
        assert_eq!(concat(&w("12"), &w("3")), w("123"));
    }

    #[test]
    fn shuffle_word_examples() {
        let p = shuffle_words(3, &w("12"), &w("3"));
        assert_eq!(p, poly(3, &[("123", 1), ("132", 1), ("312", 1)]));
        assert_eq!(p.to_string(), "123 + 132 + 312");

        assert_eq!(shuffle_words(2, &w("21"), &Word::empty()), poly(2, &[("21", 1)]));
        assert_eq!(shuffle_words(2, &Word::empty(), &w("21")), poly(2, &[("21", 1)]));

        let p = shuffle_words(2, &w("2"), &w("2"));
        assert_eq!(p, poly(2, &[("22", 2)]));
        assert_eq!(p.coefficient_sum(), int(2));
        assert_eq!(p.to_string(), "2·22");
    }

    #[test]
    fn shuffle_neutral_and_order() {
        let p = poly(2, &[("1", 1), ("2", 1)]);
        let u = TensorPoly::unit(2);
        assert_eq!(shuffle(&p, &u).unwrap(), p);
        let q = shuffle(&poly(2, &[("12", 1)]), &poly(2, &[("2", 1)])).unwrap();
        assert_eq!(q.max_order(), 3);
    }

    #[test]
    fn shuffle_associativity_example() {
        let one = poly(2, &[("1", 1)]);
        let two = poly(2, &[("2", 1)]);
        let lhs = shuffle(&one, &shuffle(&two, &two).unwrap()).unwrap();
        let rhs = shuffle(&shuffle(&one, &two).unwrap(), &two).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn shuffle_pow_examples() {
        let two = poly(2, &[("2", 1)]);
        assert_eq!(shuffle_pow(&two, 2), poly(2, &[("22", 2)]));
        let one = poly(2, &[("1", 1)]);
        assert_eq!(shuffle_pow(&one, 3), poly(2, &[("111", 6)]));
        assert_eq!(shuffle_pow(&two, 0), TensorPoly::unit(2));
    }

    #[test]
    fn count_letter_examples() {
        assert_eq!(count_letter(&w("221"), Letter(2)), 2);
        assert_eq!(count_letter(&Word::empty(), Letter(2)), 0);
        assert_eq!(count_letter(&w("2221"), Letter(1)), 1);
    }

    #[test]
    fn right_deconcat_examples() {
        let p = poly(2, &[("222", 1), ("221", 1)]);
        assert_eq!(right_deconcat_by_letter(&p, Letter(2)), poly(2, &[("22", 1)]));
        assert!(right_deconcat_by_letter(&poly(2, &[("1", 1)]), Letter(2)).is_zero());
        let p = poly(2, &[("12", 3), ("22", 2)]);
        assert_eq!(right_deconcat_by_letter(&p, Letter(2)), poly(2, &[("1", 3), ("2", 2)]));
    }

    #[test]
    fn word_text_forms() {
        assert_eq!(w("221").to_text(2), "221");
        let long = Word::new(vec![1, 2, 10]);
        assert_eq!(long.to_text(10), "1.2.10");
        assert_eq!(Word::parse("1.2.10").unwrap(), long);
        assert_eq!(Word::parse("").unwrap(), Word::empty());
        assert!(Word::parse("1a").is_err());
        assert!(Word::parse("102").is_err());
        assert!(Word::parse_in("13", 2).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let mut words = vec![w("21"), w("2"), w("111"), Word::empty(), w("12"), w("1")];
        words.sort();
        let text: Vec<_> = words.iter().map(|x| x.to_string()).collect();
        assert_eq!(text, ["ø", "1", "2", "12", "21", "111"]);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = poly(2, &[("12", 1)]);
        p.add_term(w("12"), int(-1));
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }

    #[test]
    fn json_round_trip_with_big_denominators() {
        let big = rational_from_f64(0.1).unwrap() * rational_from_f64(0.3).unwrap();
        let mut p = poly(2, &[("221", 3)]);
        p.add_term(w("2"), big);
        p.add_term(w(""), frac(-1, 3));
        let text = serde_json::to_string(&p).unwrap();
        let back: TensorPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.max_order(), 3);

        let parsed: TensorPoly =
            serde_json::from_str(r#"{"alphabet_dim":2,"terms":[{"word":"221","num":3,"den":10}]}"#).unwrap();
        assert_eq!(parsed.coeff(&w("221")), frac(3, 10));
        assert!(serde_json::from_str::<TensorPoly>(r#"{"alphabet_dim":2,"terms":[{"word":"3","num":1}]}"#).is_err());
    }
}
