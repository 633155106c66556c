//! Lyndon words over the alphabet `y1 < y2 < ...`, with letters stored as
//! composition parts and compared numerically.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::composition::{enumerate_compositions, Composition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LyndonError {
    #[error("the empty word has no Lyndon factorization")]
    EmptyWord,
    #[error("{0} is not a Lyndon word")]
    NotLyndon(Composition),
    #[error("weight must be ≥ 1")]
    ZeroWeight,
}

/// A nonempty word strictly smaller than each of its proper rotations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LyndonWord(Composition);

impl LyndonWord {
    pub fn new(word: Composition) -> Result<Self, LyndonError> {
        if is_lyndon(&word) {
            Ok(LyndonWord(word))
        } else {
            Err(LyndonError::NotLyndon(word))
        }
    }

    pub fn word(&self) -> &Composition {
        &self.0
    }

    pub fn into_word(self) -> Composition {
        self.0
    }
}

impl fmt::Display for LyndonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for LyndonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Chen–Fox–Lyndon factorization: Lyndon factors, lexicographically
/// non-increasing, whose concatenation is the input word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CflFactorization {
    pub factors: Vec<LyndonWord>,
}

impl CflFactorization {
    pub fn concatenation(&self) -> Composition {
        self.factors
            .iter()
            .fold(Composition::empty(), |acc, f| acc.concat(f.word()))
    }
}

impl fmt::Display for CflFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Duval's algorithm; returns the factor boundaries as `(start, len)`.
fn duval(s: &[u32]) -> Vec<(usize, usize)> {
    let n = s.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        let mut k = i;
        while j < n && s[k] <= s[j] {
            if s[k] < s[j] {
                k = i;
            } else {
                k += 1;
            }
            j += 1;
        }
        while i <= k {
            out.push((i, j - k));
            i += j - k;
        }
    }
    out
}

pub fn is_lyndon(w: &Composition) -> bool {
    let factors = duval(w.parts());
    factors.len() == 1
}

pub fn cfl_factorize(w: &Composition) -> Result<CflFactorization, LyndonError> {
    if w.is_empty() {
        return Err(LyndonError::EmptyWord);
    }
    let s = w.parts();
    let factors = duval(s)
        .into_iter()
        .map(|(start, len)| LyndonWord(Composition::from_parts(&s[start..start + len])))
        .collect();
    Ok(CflFactorization { factors })
}

/// All Lyndon words of weight `1..=max_weight`, grouped by weight, each
/// group in lexicographic order.
pub fn generate_lyndon(max_weight: u32) -> Result<BTreeMap<u32, Vec<LyndonWord>>, LyndonError> {
    if max_weight == 0 {
        return Err(LyndonError::ZeroWeight);
    }
    Ok((1..=max_weight)
        .map(|n| (n, lyndon_words_of_weight(n)))
        .collect())
}

/// Lyndon words of exactly weight `n`, lexicographically sorted.
pub fn lyndon_words_of_weight(n: u32) -> Vec<LyndonWord> {
    let mut words: Vec<LyndonWord> = enumerate_compositions(n, false)
        .into_iter()
        .filter(is_lyndon)
        .map(LyndonWord)
        .collect();
    words.sort_by(|a, b| a.word().lex_cmp(b.word()));
    words
}

/// Number of Lyndon words of weight `n`:
/// `(1/n)·Σ_{d|n} μ(d)·(2^{n/d} − 1)`.
pub fn count_lyndon(n: u32) -> Result<BigInt, LyndonError> {
    if n == 0 {
        return Err(LyndonError::ZeroWeight);
    }
    let mut total = BigInt::zero();
    for d in (1..=n).filter(|d| n % d == 0) {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        let term = (BigInt::one() << (n / d) as usize) - 1;
        total += term * mu;
    }
    Ok(total / n)
}

fn mobius(mut n: u32) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(parts: &[u32]) -> Composition {
        Composition::from_parts(parts)
    }

    fn rotation_oracle(w: &Composition) -> bool {
        let s = w.parts();
        !s.is_empty()
            && (1..s.len()).all(|r| {
                let rotated: Vec<u32> = s[r..].iter().chain(&s[..r]).copied().collect();
                s < rotated.as_slice()
            })
    }

    /// Every factorization into rotation-oracle Lyndon words that is
    /// non-increasing.
    fn all_cfl_factorizations(s: &[u32]) -> Vec<Vec<Vec<u32>>> {
        fn go(
            rest: &[u32],
            prev: Option<&[u32]>,
            acc: &mut Vec<Vec<u32>>,
            out: &mut Vec<Vec<Vec<u32>>>,
        ) {
            if rest.is_empty() {
                out.push(acc.clone());
                return;
            }
            for len in 1..=rest.len() {
                let head = &rest[..len];
                if !rotation_oracle(&Composition::from_parts(head)) {
                    continue;
                }
                if let Some(p) = prev {
                    if head > p {
                        continue;
                    }
                }
                acc.push(head.to_vec());
                go(&rest[len..], Some(head), acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        go(s, None, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn membership_examples() {
        assert!(is_lyndon(&c(&[1, 2])));
        assert!(!is_lyndon(&c(&[1, 1])));
        assert!(is_lyndon(&c(&[2])));
        assert!(!is_lyndon(&c(&[2, 1])));
        assert!(!is_lyndon(&Composition::empty()));
    }

    #[test]
    fn factorization_examples() {
        let f = cfl_factorize(&c(&[2, 1, 2])).unwrap();
        assert_eq!(f.factors, vec![LyndonWord(c(&[2])), LyndonWord(c(&[1, 2]))]);
        let f = cfl_factorize(&c(&[1, 1, 2])).unwrap();
        assert_eq!(f.factors, vec![LyndonWord(c(&[1, 1, 2]))]);
        let f = cfl_factorize(&c(&[3])).unwrap();
        assert_eq!(f.factors, vec![LyndonWord(c(&[3]))]);
        assert_eq!(
            cfl_factorize(&Composition::empty()),
            Err(LyndonError::EmptyWord)
        );
    }

    #[test]
    fn generation_examples() {
        let groups = generate_lyndon(4).unwrap();
        let words =
            |n: u32| -> Vec<Composition> { groups[&n].iter().map(|w| w.word().clone()).collect() };
        assert_eq!(words(1), vec![c(&[1])]);
        assert_eq!(words(2), vec![c(&[2])]);
        assert_eq!(words(3), vec![c(&[1, 2]), c(&[3])]);
        assert_eq!(words(4), vec![c(&[1, 1, 2]), c(&[1, 3]), c(&[4])]);
        assert_eq!(generate_lyndon(0), Err(LyndonError::ZeroWeight));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_lyndon(2).unwrap(), BigInt::from(1));
        assert_eq!(count_lyndon(4).unwrap(), BigInt::from(3));
        assert_eq!(count_lyndon(6).unwrap(), BigInt::from(9));
        assert_eq!(count_lyndon(0), Err(LyndonError::ZeroWeight));
    }

    #[test]
    fn count_matches_generation() {
        let groups = generate_lyndon(12).unwrap();
        for n in 1..=12 {
            assert_eq!(
                count_lyndon(n).unwrap(),
                BigInt::from(groups[&n].len()),
                "weight {n}"
            );
        }
    }

    #[test]
    fn duval_agrees_with_oracles_exhaustively() {
        for n in 1..=8 {
            let mut seen = std::collections::BTreeSet::new();
            for w in enumerate_compositions(n, false) {
                assert_eq!(is_lyndon(&w), rotation_oracle(&w), "{w}");
                let f = cfl_factorize(&w).unwrap();
                assert_eq!(f.concatenation(), w);
                for pair in f.factors.windows(2) {
                    assert!(pair[0].word().lex_cmp(pair[1].word()).is_ge());
                }
                // Lyndon ⇔ single factor (such words are necessarily aperiodic)
                assert_eq!(is_lyndon(&w), f.factors.len() == 1);
                let brute = all_cfl_factorizations(w.parts());
                assert_eq!(brute.len(), 1, "{w}");
                let duval_parts: Vec<Vec<u32>> = f
                    .factors
                    .iter()
                    .map(|l| l.word().parts().to_vec())
                    .collect();
                assert_eq!(brute[0], duval_parts);
                // factorizations of distinct words are distinct
                assert!(seen.insert(duval_parts));
            }
        }
    }

    #[test]
    fn necklace_identity_reproduces_composition_counts() {
        // Π_k (1 − t^k)^{−L_k} = 1 + Σ_{n≥1} 2^{n−1} tⁿ
        let max = 14usize;
        let mut series = vec![BigInt::zero(); max + 1];
        series[0] = BigInt::one();
        for k in 1..=max {
            let lk = count_lyndon(k as u32).unwrap();
            // multiply by (1 − t^k)^{−L_k} one factor at a time
            let mut reps = lk.clone();
            while reps > BigInt::zero() {
                for n in k..=max {
                    let add = series[n - k].clone();
                    series[n] += add;
                }
                reps -= 1;
            }
        }
        for (n, coeff) in series.iter().enumerate().skip(1) {
            assert_eq!(coeff, &(BigInt::one() << (n - 1)), "t^{n}");
        }
    }

    #[test]
    fn mobius_values() {
        let expected = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (i, &mu) in expected.iter().enumerate() {
            assert_eq!(mobius(i as u32 + 1), mu, "μ({})", i + 1);
        }
    }

    #[test]
    fn lyndon_word_constructor_validates() {
        assert!(LyndonWord::new(c(&[1, 2])).is_ok());
        assert_eq!(
            LyndonWord::new(c(&[2, 1])),
            Err(LyndonError::NotLyndon(c(&[2, 1])))
        );
    }
}
