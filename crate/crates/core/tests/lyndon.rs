use std::collections::BTreeSet;

use proptest::prelude::*;
use sigvol::algebra::{frac, shuffle, shuffle_pow, Letter, TensorPoly, Word};
use sigvol::lyndon::{
    avoid_letter_decompose, is_lyndon, lyndon_factorization, lyndon_words, radford_decompose, Convention,
    LyndonOrder, Radford,
};

fn w(s: &str) -> Word {
    Word::parse(s).unwrap()
}

fn p(s: &str) -> TensorPoly {
    TensorPoly::word(2, w(s))
}

fn sh(a: &TensorPoly, b: &TensorPoly) -> TensorPoly {
    shuffle(a, b).unwrap()
}

fn all_words(dim: u8, len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=dim).map(move |l| {
                    let mut v = w.letters().to_vec();
                    v.push(l);
                    Word::new(v)
                })
            })
            .collect();
    }
    out
}

fn mobius(n: usize) -> i64 {
    let (mut m, mut k, mut sign) = (n, 2, 1);
    while k * k <= m {
        if m % k == 0 {
            m /= k;
            if m % k == 0 {
                return 0;
            }
            sign = -sign;
        }
        k += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

fn witt(d: usize, n: usize) -> usize {
    let s: i64 = (1..=n)
        .filter(|k| n % k == 0)
        .map(|k| mobius(k) * (d as i64).pow((n / k) as u32))
        .sum();
    (s / n as i64) as usize
}

/// Lyndon by definition: strictly greater (or, classically, smaller) than
/// every nontrivial rotation.
fn lyndon_by_rotation(w: &Word, greater: bool) -> bool {
    let l = w.letters();
    (1..l.len()).all(|k| {
        let rot: Vec<u8> = l[k..].iter().chain(&l[..k]).copied().collect();
        if greater {
            l > rot.as_slice()
        } else {
            l < rot.as_slice()
        }
    })
}

#[test]
fn example_table_identities() {
    let half = frac(1, 2);
    let sixth = frac(1, 6);
    let one = p("1");
    let two = p("2");
    let cases: Vec<(&str, TensorPoly)> = vec![
        ("11", shuffle_pow(&one, 2).scaled(&half)),
        ("12", sh(&one, &two).sub(&p("21")).unwrap()),
        ("22", shuffle_pow(&two, 2).scaled(&half)),
        ("111", shuffle_pow(&one, 3).scaled(&sixth)),
        (
            "122",
            sh(&one, &shuffle_pow(&two, 2)).scaled(&half).sub(&sh(&p("21"), &two)).unwrap().add(&p("221")).unwrap(),
        ),
        ("112", sh(&p("11"), &two).sub(&sh(&p("21"), &one)).unwrap().add(&p("211")).unwrap()),
        ("212", sh(&p("21"), &two).sub(&p("221").scaled(&frac(2, 1))).unwrap()),
        ("121", sh(&p("21"), &one).sub(&p("211").scaled(&frac(2, 1))).unwrap()),
        ("222", shuffle_pow(&two, 3).scaled(&sixth)),
    ];
    for (word, rhs) in cases {
        assert_eq!(rhs, p(word), "{word}");
    }
}

#[test]
fn example_table_renderings() {
    let r = |s: &str| radford_decompose(&w(s), &LyndonOrder::greater(2)).unwrap().to_string();
    assert_eq!(r("12"), "1 ⧢ 2 − 21");
    assert_eq!(r("212"), "21 ⧢ 2 − 2·221");
    assert_eq!(r("121"), "21 ⧢ 1 − 2·211");
    assert_eq!(r("122"), "1/2·1 ⧢ 2^⧢2 − 21 ⧢ 2 + 221");
    assert_eq!(r("222"), "1/6·2^⧢3");
    assert_eq!(r("2"), "2");
}

#[test]
fn lyndon_sets_of_the_example() {
    let got: Vec<String> = lyndon_words(2, 3, &LyndonOrder::greater(2))
        .unwrap()
        .iter()
        .map(|w| w.to_string())
        .collect();
    assert_eq!(got, ["2", "1", "21", "221", "211"]);
}

#[test]
fn witt_counts() {
    for d in [2usize, 3] {
        for conv in [Convention::Greater, Convention::Classical] {
            let words = lyndon_words(d, 6, &LyndonOrder::new(conv, d)).unwrap();
            for n in 1..=6 {
                let count = words.iter().filter(|w| w.len() == n).count();
                assert_eq!(count, witt(d, n), "d={d} n={n} {conv:?}");
            }
        }
    }
}

#[test]
fn generation_agrees_with_rotation_definition() {
    for d in [2u8, 3] {
        for conv in [Convention::Greater, Convention::Classical] {
            let order = LyndonOrder::new(conv, d as usize);
            let generated: BTreeSet<Word> = lyndon_words(d as usize, 5, &order).unwrap().into_iter().collect();
            let greater = conv == Convention::Greater;
            let by_def: BTreeSet<Word> = (1..=5)
                .flat_map(|n| all_words(d, n))
                .filter(|w| lyndon_by_rotation(w, greater))
                .collect();
            assert_eq!(generated, by_def);
            for w in &by_def {
                assert!(is_lyndon(w, &order).unwrap());
            }
        }
    }
}

#[test]
fn radford_round_trip_exhaustive() {
    for d in [2u8, 3] {
        let mut radford = Radford::new(LyndonOrder::greater(d as usize));
        for n in 1..=5 {
            for word in all_words(d, n) {
                let sp = radford.decompose(&word).unwrap();
                let expanded = sp.expand();
                assert_eq!(expanded, TensorPoly::word(d as usize, word.clone()), "{word}");
                let lyndon = LyndonOrder::greater(d as usize);
                for (m, _) in sp.terms() {
                    for (v, _) in m.factors() {
                        assert!(is_lyndon(v, &lyndon).unwrap(), "{v} in decomposition of {word}");
                    }
                }
            }
        }
    }
}

#[test]
fn avoid_letter_examples_and_property() {
    assert_eq!(avoid_letter_decompose(&w("12"), Letter(2)).unwrap().to_string(), "1 ⧢ 2 − 21");
    for d in [2u8, 3] {
        for k in 1..=d {
            for n in 1..=4 {
                for word in all_words(d, n) {
                    let sp = sigvol::lyndon::avoid_letter_decompose_in(&word, Letter(k), d as usize).unwrap();
                    assert_eq!(sp.expand(), TensorPoly::word(d as usize, word.clone()));
                    // no factor other than the letter itself ends with it
                    for (m, _) in sp.terms() {
                        for (v, _) in m.factors() {
                            assert!(v.len() == 1 || v.last() != Some(Letter(k)), "{v} in {word}, k={k}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn empty_word_is_not_lyndon() {
    assert!(is_lyndon(&Word::empty(), &LyndonOrder::greater(2)).is_err());
}

proptest! {
    #[test]
    fn factorization_is_nonincreasing_lyndon(letters in prop::collection::vec(1u8..=3, 1..12)) {
        let word = Word::new(letters);
        let order = LyndonOrder::greater(3);
        let factors = lyndon_factorization(&word, &order).unwrap();
        let joined: Vec<u8> = factors.iter().flat_map(|f| f.letters().to_vec()).collect();
        prop_assert_eq!(joined.as_slice(), word.letters());
        for f in &factors {
            prop_assert!(is_lyndon(f, &order).unwrap());
        }
        // nonincreasing in the lexicographic order on the reversed alphabet
        let rev = |w: &Word| w.letters().iter().map(|&l| 4 - l).collect::<Vec<u8>>();
        for pair in factors.windows(2) {
            prop_assert!(rev(&pair[0]) >= rev(&pair[1]));
        }
    }
}
