//! Lyndon words and shuffle-polynomial decompositions.
//!
//! Two comparison conventions are supported. Under [`Convention::Greater`] a
//! Lyndon word is strictly greater than all of its nontrivial rotations
//! (so `21`, `221`, `211` are Lyndon over `{1, 2}`); under
//! [`Convention::Classical`] it is strictly smaller. An optional alphabet
//! permutation changes which letter counts as greatest.
//!
//! Internally each letter is mapped to a key such that Lyndon words under
//! the active order are exactly the classical Lyndon words of the key
//! sequence, and all algorithms (Duval generation and factorization) run on
//! keys.
//!
//! Every word is a unique polynomial, under the shuffle product, in Lyndon
//! words. [`radford_decompose`] finds it by triangular elimination: the
//! shuffle of the Lyndon factors of `w` contains `w` as its greatest word
//! with coefficient `Π mult!`, so `w` equals that product divided by the
//! coefficient minus the decompositions of the strictly smaller words.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{coeff_prefix, int, join_signed, shuffle, shuffle_pow, Letter, Rational, TensorPoly, Word};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Lyndon words are strictly greater than their rotations.
    #[default]
    Greater,
    /// Lyndon words are strictly smaller than their rotations.
    Classical,
}

/// Comparison convention plus an alphabet permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LyndonOrder {
    convention: Convention,
    /// `ranks[l - 1]` is the rank of letter `l`; rank `d - 1` is greatest.
    ranks: Vec<u8>,
}

impl LyndonOrder {
    pub fn new(convention: Convention, alphabet_dim: usize) -> Self {
        LyndonOrder {
            convention,
            ranks: (0..alphabet_dim as u8).collect(),
        }
    }

    pub fn greater(alphabet_dim: usize) -> Self {
        Self::new(Convention::Greater, alphabet_dim)
    }

    pub fn classical(alphabet_dim: usize) -> Self {
        Self::new(Convention::Classical, alphabet_dim)
    }

    /// Custom ranking; `ranks` must be a permutation of `0..d`.
    pub fn with_ranks(convention: Convention, ranks: Vec<u8>) -> Result<Self> {
        let mut seen = vec![false; ranks.len()];
        for &r in &ranks {
            match seen.get_mut(r as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => return Err(Error::param("ranks", "not a permutation of the alphabet")),
            }
        }
        Ok(LyndonOrder { convention, ranks })
    }

    /// Greater convention with letter `k` ranked greatest and the remaining
    /// letters in their natural order below it.
    pub fn placing_greatest(alphabet_dim: usize, k: Letter) -> Result<Self> {
        if k.index() == 0 || k.index() > alphabet_dim {
            return Err(Error::LetterOutOfRange {
                letter: k.index(),
                dim: alphabet_dim,
            });
        }
        let mut ranks = Vec::with_capacity(alphabet_dim);
        let mut next = 0u8;
        for l in 1..=alphabet_dim {
            if l == k.index() {
                ranks.push(alphabet_dim as u8 - 1);
            } else {
                ranks.push(next);
                next += 1;
            }
        }
        Self::with_ranks(Convention::Greater, ranks)
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn alphabet_dim(&self) -> usize {
        self.ranks.len()
    }

    fn key(&self, l: u8) -> u8 {
        let rank = self.ranks[l as usize - 1];
        match self.convention {
            Convention::Classical => rank,
            Convention::Greater => self.ranks.len() as u8 - 1 - rank,
        }
    }

    fn letter_of_key(&self, key: u8) -> u8 {
        (1..=self.ranks.len() as u8).find(|&l| self.key(l) == key).expect("key in range")
    }

    fn keys(&self, w: &Word) -> Result<Vec<u8>> {
        w.check_alphabet(self.alphabet_dim())?;
        Ok(w.letters().iter().map(|&l| self.key(l)).collect())
    }

    /// Lexicographic comparison in which a Lyndon word sits below its
    /// rotations.
    fn cmp_keys(&self, a: &Word, b: &Word) -> Ordering {
        let ka = a.letters().iter().map(|&l| self.key(l));
        let kb = b.letters().iter().map(|&l| self.key(l));
        ka.cmp(kb)
    }

    /// Graded order used to list Lyndon words: length first, then keys.
    pub fn graded_cmp(&self, a: &Word, b: &Word) -> Ordering {
        a.len().cmp(&b.len()).then_with(|| self.cmp_keys(a, b))
    }
}

fn is_lyndon_keys(k: &[u8]) -> bool {
    let n = k.len();
    (1..n).all(|r| {
        let rotated = k[r..].iter().chain(&k[..r]);
        k.iter().cmp(rotated) == Ordering::Less
    })
}

pub fn is_lyndon(w: &Word, order: &LyndonOrder) -> Result<bool> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(is_lyndon_keys(&order.keys(w)?))
}

/// All Lyndon words of length `1..=max_len`, sorted by [`LyndonOrder::graded_cmp`].
pub fn lyndon_words(alphabet_dim: usize, max_len: usize, order: &LyndonOrder) -> Result<Vec<Word>> {
    if order.alphabet_dim() != alphabet_dim {
        return Err(Error::AlphabetMismatch(order.alphabet_dim(), alphabet_dim));
    }
    if max_len == 0 {
        return Err(Error::param("max_len", "must be at least 1"));
    }
    let top = alphabet_dim as u8 - 1;
    let mut out = Vec::new();
    // Duval's generator over keys 0..d
    let mut k: Vec<u8> = vec![0];
    loop {
        out.push(Word::new(k.iter().map(|&x| order.letter_of_key(x)).collect()));
        let m = k.len();
        while k.len() < max_len {
            k.push(k[k.len() - m]);
        }
        while k.last() == Some(&top) {
            k.pop();
        }
        match k.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out.sort_by(|a, b| order.graded_cmp(a, b));
    Ok(out)
}

/// Chen–Fox–Lyndon factorization into Lyndon words that are non-increasing
/// under the order.
pub fn lyndon_factorization(w: &Word, order: &LyndonOrder) -> Result<Vec<Word>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let s = order.keys(w)?;
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let (mut j, mut k) = (i + 1, i);
        while j < s.len() && s[k] <= s[j] {
            k = if s[k] < s[j] { i } else { k + 1 };
            j += 1;
        }
        while i <= k {
            out.push(Word::from(&w.letters()[i..i + j - k]));
            i += j - k;
        }
    }
    Ok(out)
}

/// Product `v₁^⧢p₁ ⧢ ... ⧢ vₙ^⧢pₙ` of distinct words with positive powers.
///
/// Factors are kept longest first, ties in natural word order; the empty
/// product is the unit `ø`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Word, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(factors: impl IntoIterator<Item = (Word, u32)>) -> Self {
        let mut merged: BTreeMap<(Reverse<usize>, Vec<u8>), u32> = BTreeMap::new();
        for (w, p) in factors {
            if p > 0 {
                *merged.entry((Reverse(w.len()), w.letters().to_vec())).or_default() += p;
            }
        }
        Monomial(merged.into_iter().map(|((_, l), p)| (Word::new(l), p)).collect())
    }

    pub fn factors(&self) -> &[(Word, u32)] {
        &self.0
    }

    /// Total number of factors counted with multiplicity.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, p)| p).sum()
    }

    /// `Σ pᵢ |vᵢ|`.
    pub fn weight(&self) -> usize {
        self.0.iter().map(|(w, p)| w.len() * *p as usize).sum()
    }

    pub fn expand(&self, alphabet_dim: usize) -> TensorPoly {
        self.0.iter().fold(TensorPoly::unit(alphabet_dim), |acc, (w, p)| {
            let pw = shuffle_pow(&TensorPoly::word(alphabet_dim, w.clone()), *p);
            shuffle(&acc, &pw).expect("same alphabet")
        })
    }

    fn render(&self, alphabet_dim: usize) -> String {
        if self.0.is_empty() {
            return "ø".into();
        }
        self.0
            .iter()
            .map(|(w, p)| {
                let text = w.to_text(alphabet_dim);
                if *p == 1 {
                    text
                } else {
                    format!("{text}^⧢{p}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ⧢ ")
    }
}

/// Rational linear combination of shuffle monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShufflePolynomial {
    alphabet_dim: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl ShufflePolynomial {
    pub fn zero(alphabet_dim: usize) -> Self {
        ShufflePolynomial {
            alphabet_dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(alphabet_dim: usize) -> Self {
        Self::monomial(alphabet_dim, Monomial::unit(), Rational::one())
    }

    pub fn monomial(alphabet_dim: usize, m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(alphabet_dim);
        p.add_term(m, c);
        p
    }

    pub fn alphabet_dim(&self) -> usize {
        self.alphabet_dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add_scaled(&mut self, other: &ShufflePolynomial, c: &Rational) {
        for (m, a) in &other.terms {
            self.add_term(m.clone(), a * c);
        }
    }

    /// Evaluates all shuffle powers and products.
    pub fn expand(&self) -> TensorPoly {
        let mut out = TensorPoly::zero(self.alphabet_dim);
        for (m, c) in &self.terms {
            out.add_scaled(&m.expand(self.alphabet_dim), c);
        }
        out
    }
}

pub fn expand(sp: &ShufflePolynomial) -> TensorPoly {
    sp.expand()
}

impl fmt::Display for ShufflePolynomial {
    /// Renders e.g. `1/2·1 ⧢ 2^⧢2 − 21 ⧢ 2 + 221`, higher-degree monomials
    /// first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| a.cmp(b)));
        let parts = terms.into_iter().map(|(m, c)| {
            let (neg, prefix) = coeff_prefix(c);
            (neg, format!("{prefix}{}", m.render(self.alphabet_dim)))
        });
        f.write_str(&join_signed(parts))
    }
}

/// Memoized decomposer for one order.
#[derive(Debug)]
pub struct Radford {
    order: LyndonOrder,
    memo: HashMap<Word, ShufflePolynomial>,
}

impl Radford {
    pub fn new(order: LyndonOrder) -> Self {
        Radford {
            order,
            memo: HashMap::new(),
        }
    }

    pub fn order(&self) -> &LyndonOrder {
        &self.order
    }

    pub fn decompose(&mut self, w: &Word) -> Result<ShufflePolynomial> {
        let dim = self.order.alphabet_dim();
        w.check_alphabet(dim)?;
        if let Some(hit) = self.memo.get(w) {
            return Ok(hit.clone());
        }
        if w.is_empty() {
            return Ok(ShufflePolynomial::unit(dim));
        }
        let factors = lyndon_factorization(w, &self.order)?;
        let mut grouped: Vec<(Word, u32)> = Vec::new();
        for f in factors {
            match grouped.last_mut() {
                Some((last, p)) if *last == f => *p += 1,
                _ => grouped.push((f, 1)),
            }
        }
        let monomial = Monomial::new(grouped);
        let result = if monomial.degree() == 1 {
            ShufflePolynomial::monomial(dim, monomial, Rational::one())
        } else {
            let product = monomial.expand(dim);
            let lead = product.coeff(w);
            debug_assert_eq!(
                lead,
                monomial.factors().iter().fold(int(1), |acc, (_, p)| acc * int(factorial(*p)))
            );
            let mut out = ShufflePolynomial::monomial(dim, monomial, lead.recip());
            for (u, a) in product.terms() {
                if u == w {
                    continue;
                }
                debug_assert_eq!(self.order.cmp_keys(u, w), Ordering::Less);
                let sub = self.decompose(u)?;
                out.add_scaled(&sub, &(-a / &lead));
            }
            out
        };
        self.memo.insert(w.clone(), result.clone());
        Ok(result)
    }
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// Expresses `w` as a shuffle polynomial in Lyndon words of `order`.
pub fn radford_decompose(w: &Word, order: &LyndonOrder) -> Result<ShufflePolynomial> {
    Radford::new(order.clone()).decompose(w)
}

/// Decomposition of `w` whose factors never end in `k` unless equal to `k`.
///
/// The alphabet is taken large enough to hold both `w` and `k`.
pub fn avoid_letter_decompose(w: &Word, k: Letter) -> Result<ShufflePolynomial> {
    let dim = w.max_letter().max(k.index()).max(1);
    avoid_letter_decompose_in(w, k, dim)
}

pub fn avoid_letter_decompose_in(w: &Word, k: Letter, alphabet_dim: usize) -> Result<ShufflePolynomial> {
    let order = LyndonOrder::placing_greatest(alphabet_dim, k)?;
    radford_decompose(w, &order)
}
