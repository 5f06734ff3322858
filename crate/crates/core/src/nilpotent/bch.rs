//! Dynkin's form of the Baker–Campbell–Hausdorff series.
//!
//! `log(e^X e^Y) = Σ_n (-1)^{n+1}/n Σ [X^{r_1} Y^{s_1} … X^{r_n} Y^{s_n}] / (N Π r_i! s_i!)`
//! where the sum runs over `(r_i, s_i) ≠ (0, 0)`, `N = Σ (r_i + s_i)` and
//! the bracket is the right-nested commutator of the word. In a nilpotent
//! algebra of step `m` every word of length `> m` vanishes, so truncating at
//! `N = m` is exact.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::rational_to_f64;

use super::algebra::GradedLieAlgebra;

/// A word in the letters `X = false`, `Y = true`.
pub type Word = Vec<bool>;

/// The BCH series up to a fixed degree, as merged `(word, coefficient)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BchTable {
    degree: u32,
    terms: Vec<(Word, BigRational, f64)>,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Right-nested commutators of words that end in two equal letters vanish.
fn word_survives(w: &[bool]) -> bool {
    w.len() < 2 || w[w.len() - 1] != w[w.len() - 2]
}

impl BchTable {
    pub fn new(degree: u32) -> Self {
        let mut merged: BTreeMap<Word, BigRational> = BTreeMap::new();
        for total in 1..=degree {
            // every block (r, s) contributes at least one letter
            for n in 1..=total {
                let sign = if n % 2 == 1 { BigRational::one() } else { -BigRational::one() };
                let outer = sign / BigRational::from_integer(BigInt::from(n) * BigInt::from(total));
                let mut blocks = Vec::with_capacity(n as usize);
                enumerate_blocks(n, total, &mut blocks, &mut |blocks| {
                    let mut word = Vec::with_capacity(total as usize);
                    let mut denom = BigInt::one();
                    for &(r, s) in blocks.iter() {
                        word.extend(std::iter::repeat(false).take(r as usize));
                        word.extend(std::iter::repeat(true).take(s as usize));
                        denom *= factorial(r) * factorial(s);
                    }
                    if word_survives(&word) {
                        let c = outer.clone() / BigRational::from_integer(denom);
                        *merged.entry(word).or_insert_with(BigRational::zero) += c;
                    }
                });
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(w, c)| {
                let f = rational_to_f64(&c);
                (w, c, f)
            })
            .collect();
        BchTable { degree, terms }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Merged non-zero terms.
    pub fn terms(&self) -> impl Iterator<Item = (&[bool], &BigRational)> {
        self.terms.iter().map(|(w, c, _)| (w.as_slice(), c))
    }

    /// `log(exp X exp Y)` in the given algebra.
    pub fn product<S: crate::scalar::Scalar>(&self, algebra: &GradedLieAlgebra, x: &[S], y: &[S]) -> Vec<S> {
        let mut out: Vec<S> = x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect();
        if self.degree <= 2 {
            // the merged series is X + Y + [X, Y]/2
            let half = S::from_ratio(1, 2);
            for (o, v) in out.iter_mut().zip(algebra.bracket(x, y)) {
                if !v.is_zero() {
                    *o = o.clone() + half.clone() * v;
                }
            }
            return out;
        }
        // right-nested brackets share suffixes; cache them by word tail
        let mut cache: BTreeMap<&[bool], Vec<S>> = BTreeMap::new();
        for (word, exact, approx) in &self.terms {
            if word.len() < 2 {
                continue;
            }
            let value = nested(algebra, word, x, y, &mut cache);
            let c = S::from_pair(exact, *approx);
            for (o, v) in out.iter_mut().zip(value) {
                if !v.is_zero() {
                    *o = o.clone() + c.clone() * v;
                }
            }
        }
        out
    }
}

fn nested<'w, S: crate::scalar::Scalar>(
    algebra: &GradedLieAlgebra,
    word: &'w [bool],
    x: &[S],
    y: &[S],
    cache: &mut BTreeMap<&'w [bool], Vec<S>>,
) -> Vec<S> {
    if let Some(v) = cache.get(word) {
        return v.clone();
    }
    let letter = |b: bool| if b { y.to_vec() } else { x.to_vec() };
    let value = if word.len() == 1 {
        letter(word[0])
    } else {
        let tail = nested(algebra, &word[1..], x, y, cache);
        if tail.iter().all(|v| v.is_zero()) {
            tail
        } else {
            algebra.bracket(&letter(word[0]), &tail)
        }
    };
    cache.insert(word, value.clone());
    value
}

/// Calls `visit` with every sequence of `n` pairs `(r, s) ≠ (0, 0)` summing to `total`.
fn enumerate_blocks(n: u32, total: u32, prefix: &mut Vec<(u32, u32)>, visit: &mut dyn FnMut(&[(u32, u32)])) {
    if n == 0 {
        if total == 0 {
            visit(prefix);
        }
        return;
    }
    // leave at least one letter for each remaining block
    for size in 1..=total.saturating_sub(n - 1) {
        for r in 0..=size {
            prefix.push((r, size - r));
            enumerate_blocks(n - 1, total - size, prefix, visit);
            prefix.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn coefficient(t: &BchTable, w: &str) -> BigRational {
        let word: Vec<bool> = w.chars().map(|c| c == 'Y').collect();
        t.terms().find(|(v, _)| *v == word.as_slice()).map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    #[test]
    fn degree_two_is_half_commutator() {
        let t = BchTable::new(2);
        // [X,Y]/4 - [Y,X]/4 = [X,Y]/2 once antisymmetry is applied
        assert_eq!(coefficient(&t, "XY"), q(1, 4));
        assert_eq!(coefficient(&t, "YX"), q(-1, 4));
        assert_eq!(coefficient(&t, "X"), q(1, 1));
        assert_eq!(coefficient(&t, "Y"), q(1, 1));
    }

    #[test]
    fn degree_three_matches_classical_series() {
        // the classical degree-3 part is ([X,[X,Y]] + [Y,[Y,X]]) / 12; in
        // Dynkin's unsimplified form it is spread over several words, so
        // compare after evaluating in the free nilpotent algebra of step 3
        // on two generators: basis X, Y, [X,Y], [X,[X,Y]], [Y,[X,Y]]
        let f = GradedLieAlgebra::from_constants(
            vec![1, 1, 2, 3, 3],
            &[(0, 1, 2, q(1, 1)), (0, 2, 3, q(1, 1)), (1, 2, 4, q(1, 1))],
        )
        .unwrap();
        f.validate().unwrap();
        let t = BchTable::new(3);
        let z = t.product(&f, &[q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)], &[q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(0, 1)]);
        // [Y,[Y,X]] = -[Y,[X,Y]]
        assert_eq!(z, vec![q(1, 1), q(1, 1), q(1, 2), q(1, 12), q(-1, 12)]);
    }

    #[test]
    fn degree_four_matches_classical_series() {
        // free step-4 algebra on X, Y:
        // e3 = [X,Y], e4 = [X,e3], e5 = [Y,e3], e6 = [X,e4], e7 = [Y,e4] = [X,e5], e8 = [Y,e5]
        let c = |i: usize, j: usize, k: usize| (i - 1, j - 1, k - 1, q(1, 1));
        let f = GradedLieAlgebra::from_constants(
            vec![1, 1, 2, 3, 3, 4, 4, 4],
            &[c(1, 2, 3), c(1, 3, 4), c(2, 3, 5), c(1, 4, 6), c(2, 4, 7), c(1, 5, 7), c(2, 5, 8)],
        )
        .unwrap();
        f.validate().unwrap();
        let t = BchTable::new(4);
        let unit = |i: usize| (0..8).map(|k| q((k == i) as i64, 1)).collect::<Vec<_>>();
        let z = t.product(&f, &unit(0), &unit(1));
        // X + Y + [X,Y]/2 + [X,[X,Y]]/12 - [Y,[X,Y]]/12 - [Y,[X,[X,Y]]]/24
        assert_eq!(z, vec![q(1, 1), q(1, 1), q(1, 2), q(1, 12), q(-1, 12), q(0, 1), q(-1, 24), q(0, 1)]);
    }

    #[test]
    fn short_form_agrees_with_full_series_in_step_two() {
        let h = GradedLieAlgebra::from_constants(vec![1, 1, 2], &[(0, 1, 2, q(1, 1))]).unwrap();
        let x = [q(3, 4), q(-1, 3), q(2, 5)];
        let y = [q(-5, 7), q(1, 2), q(1, 9)];
        assert_eq!(BchTable::new(2).product(&h, &x, &y), BchTable::new(4).product(&h, &x, &y));
    }
}
