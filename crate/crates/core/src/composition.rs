//! Compositions (finite sequences of positive integers) and exact formal sums
//! over them.
//!
//! A [`Composition`] plays three roles at once: the exponent tuple of a
//! Hurwitz multizeta function, the index of a monomial quasi-symmetric
//! function, and a word over the alphabet `y1 < y2 < ...`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::num::IntErrorKind;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while reading compositions or serialized sums.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid token `{token}`: not an integer")]
    NotAnInteger { token: String },
    #[error("invalid token `{token}`: part must be ≥ 1")]
    NonPositive { token: String },
    #[error("invalid token `{token}`: part overflows a 32-bit integer")]
    Overflow { token: String },
    #[error("invalid rational `{0}`")]
    Rational(String),
    #[error("malformed formal sum: {0}")]
    Malformed(String),
}

/// A finite sequence of integers ≥ 1. The empty composition is the unit.
///
/// Ordering is the canonical total order used everywhere in the crate:
/// shorter depth first, then lexicographic on the parts.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Composition(Vec<u32>);

/// Weight, depth and degree of a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measures {
    pub weight: u64,
    pub depth: usize,
    pub degree: u64,
}

impl Composition {
    /// The empty composition.
    pub fn empty() -> Self {
        Composition(Vec::new())
    }

    /// Builds a composition, rejecting zero parts.
    pub fn new(parts: Vec<u32>) -> Result<Self, ParseError> {
        if parts.contains(&0) {
            return Err(ParseError::NonPositive {
                token: "0".to_string(),
            });
        }
        Ok(Composition(parts))
    }

    /// Builds a composition from parts known to be positive.
    ///
    /// Panics on a zero part.
    pub fn from_parts(parts: &[u32]) -> Self {
        assert!(
            parts.iter().all(|&p| p >= 1),
            "composition parts must be ≥ 1"
        );
        Composition(parts.to_vec())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&p| u64::from(p)).sum()
    }

    pub fn measures(&self) -> Measures {
        let weight = self.weight();
        let depth = self.depth();
        Measures {
            weight,
            depth,
            degree: weight - depth as u64,
        }
    }

    /// `true` for the empty composition and whenever the first part is ≥ 2.
    pub fn is_convergent(&self) -> bool {
        self.0.first().map_or(true, |&first| first >= 2)
    }

    /// Composition with `letter` prepended.
    pub fn prepend(&self, letter: u32) -> Self {
        let mut parts = Vec::with_capacity(self.0.len() + 1);
        parts.push(letter);
        parts.extend_from_slice(&self.0);
        Composition(parts)
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Composition) -> Self {
        let mut parts = self.0.clone();
        parts.extend_from_slice(&other.0);
        Composition(parts)
    }

    /// The composition with its last part removed (`∅` stays `∅`).
    pub fn drop_last(&self) -> Self {
        let mut parts = self.0.clone();
        parts.pop();
        Composition(parts)
    }

    pub fn first(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// Canonical text: comma-separated parts, empty string for `∅`.
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Lexicographic comparison on parts, ignoring depth.
    pub fn lex_cmp(&self, other: &Composition) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl Ord for Composition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Composition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_text())
    }
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl TryFrom<Vec<u32>> for Composition {
    type Error = ParseError;

    fn try_from(parts: Vec<u32>) -> Result<Self, Self::Error> {
        Composition::new(parts)
    }
}

impl From<Composition> for Vec<u32> {
    fn from(c: Composition) -> Self {
        c.0
    }
}

impl FromStr for Composition {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_composition(s)
    }
}

/// Parses the canonical comma-separated format. The empty (or all-blank)
/// string denotes `∅`.
pub fn parse_composition(text: &str) -> Result<Composition, ParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Composition::empty());
    }
    let parts = text
        .split(',')
        .map(|raw| {
            let token = raw.trim();
            match token.parse::<i64>() {
                Ok(v) if v <= 0 => Err(ParseError::NonPositive {
                    token: token.to_string(),
                }),
                Ok(v) => u32::try_from(v).map_err(|_| ParseError::Overflow {
                    token: token.to_string(),
                }),
                Err(e) => Err(match e.kind() {
                    IntErrorKind::PosOverflow => ParseError::Overflow {
                        token: token.to_string(),
                    },
                    IntErrorKind::NegOverflow => ParseError::NonPositive {
                        token: token.to_string(),
                    },
                    _ => ParseError::NotAnInteger {
                        token: token.to_string(),
                    },
                }),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Composition(parts))
}

/// All compositions of `weight` in canonical order, optionally restricted to
/// convergent ones.
pub fn enumerate_compositions(weight: u32, convergent_only: bool) -> Vec<Composition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill_compositions(weight, &mut current, &mut out);
    if convergent_only {
        out.retain(Composition::is_convergent);
    }
    out.sort();
    out
}

fn fill_compositions(remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Composition>) {
    if remaining == 0 {
        out.push(Composition(current.clone()));
        return;
    }
    for part in 1..=remaining {
        current.push(part);
        fill_compositions(remaining - part, current, out);
        current.pop();
    }
}

/// A finite linear combination of compositions with exact rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct FormalSum {
    terms: BTreeMap<Composition, BigRational>,
}

impl FormalSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `{∅: 1}`, the unit of the stuffle algebra.
    pub fn one() -> Self {
        Self::monomial(Composition::empty())
    }

    /// `{c: 1}`.
    pub fn monomial(c: Composition) -> Self {
        Self::term(c, BigRational::one())
    }

    pub fn term(c: Composition, coeff: BigRational) -> Self {
        let mut sum = Self::zero();
        sum.add_term(c, coeff);
        sum
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

    /// Coefficient of `c` (zero when absent).
    pub fn coeff(&self, c: &Composition) -> BigRational {
        self.terms.get(c).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms in canonical composition order.
    pub fn iter(&self) -> impl Iterator<Item = (&Composition, &BigRational)> {
        self.terms.iter()
    }

    /// Adds `coeff·c`, dropping the entry if it cancels.
    pub fn add_term(&mut self, c: Composition, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(c) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    /// `self += scalar·other`.
    pub fn add_scaled(&mut self, other: &FormalSum, scalar: &BigRational) {
        if scalar.is_zero() {
            return;
        }
        for (c, q) in &other.terms {
            self.add_term(c.clone(), q * scalar);
        }
    }

    pub fn scaled(&self, scalar: &BigRational) -> FormalSum {
        let mut out = FormalSum::zero();
        out.add_scaled(self, scalar);
        out
    }

    /// Applies `letter·` to every composition.
    pub fn prepend(&self, letter: u32) -> FormalSum {
        FormalSum {
            terms: self
                .terms
                .iter()
                .map(|(c, q)| (c.prepend(letter), q.clone()))
                .collect(),
        }
    }

    /// Set of weights appearing in the sum.
    pub fn weights(&self) -> Vec<u64> {
        let mut w: Vec<u64> = self.terms.keys().map(Composition::weight).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    /// Serializable view in canonical order.
    pub fn to_serial(&self) -> Vec<SerialTerm> {
        self.terms
            .iter()
            .map(|(c, q)| SerialTerm {
                coeff: q.to_string(),
                composition: c.parts().to_vec(),
            })
            .collect()
    }

    pub fn from_serial(terms: &[SerialTerm]) -> Result<FormalSum, ParseError> {
        let mut sum = FormalSum::zero();
        for t in terms {
            let c = Composition::new(t.composition.clone())?;
            sum.add_term(c, parse_rational(&t.coeff)?);
        }
        Ok(sum)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_serial()).expect("formal sum serializes")
    }

    pub fn from_json(text: &str) -> Result<FormalSum, ParseError> {
        let terms: Vec<SerialTerm> =
            serde_json::from_str(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
        Self::from_serial(&terms)
    }
}

impl FromIterator<(Composition, BigRational)> for FormalSum {
    fn from_iter<I: IntoIterator<Item = (Composition, BigRational)>>(iter: I) -> Self {
        let mut sum = FormalSum::zero();
        for (c, q) in iter {
            sum.add_term(c, q);
        }
        sum
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, q)) in self.terms.iter().enumerate() {
            let negative = q < &BigRational::zero();
            let magnitude = if negative { -q.clone() } else { q.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if magnitude.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{magnitude}*{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalSum[{self}]")
    }
}

/// One serialized term: `{"coeff": "p/q", "composition": [parts]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialTerm {
    pub coeff: String,
    pub composition: Vec<u32>,
}

/// `a + scalar·b`, normalized.
pub fn sum_combine(a: &FormalSum, b: &FormalSum, scalar: &BigRational) -> FormalSum {
    let mut out = a.clone();
    out.add_scaled(b, scalar);
    out
}

/// Parses `"p"`, `"p/q"` or `"-p/q"`.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseError> {
    let bad = || ParseError::Rational(text.to_string());
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Integer rational shorthand.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `n/d` rational shorthand.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(parts: &[u32]) -> Composition {
        Composition::from_parts(parts)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_composition("2,1,3").unwrap(), c(&[2, 1, 3]));
        assert_eq!(parse_composition("").unwrap(), Composition::empty());
        let err = parse_composition("2,0,1").unwrap_err();
        assert!(err.to_string().contains("part must be ≥ 1"), "{err}");
        assert!(matches!(err, ParseError::NonPositive { ref token } if token == "0"));
    }

    #[test]
    fn parse_errors_name_the_token() {
        assert_eq!(
            parse_composition("2,x").unwrap_err(),
            ParseError::NotAnInteger { token: "x".into() }
        );
        assert_eq!(
            parse_composition("2,-3").unwrap_err(),
            ParseError::NonPositive { token: "-3".into() }
        );
        assert_eq!(
            parse_composition("5000000000").unwrap_err(),
            ParseError::Overflow {
                token: "5000000000".into()
            }
        );
        assert_eq!(
            parse_composition("99999999999999999999999").unwrap_err(),
            ParseError::Overflow {
                token: "99999999999999999999999".into()
            }
        );
        assert!(parse_composition("2,,1").is_err());
    }

    #[test]
    fn measures_examples() {
        let m = c(&[2, 1]).measures();
        assert_eq!((m.weight, m.depth, m.degree), (3, 2, 1));
        let m = Composition::empty().measures();
        assert_eq!((m.weight, m.depth, m.degree), (0, 0, 0));
        let m = c(&[5]).measures();
        assert_eq!((m.weight, m.depth, m.degree), (5, 1, 4));
    }

    #[test]
    fn convergence() {
        assert!(c(&[2, 1]).is_convergent());
        assert!(!c(&[1, 2]).is_convergent());
        assert!(Composition::empty().is_convergent());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_compositions(3, true), vec![c(&[3]), c(&[2, 1])]);
        assert_eq!(enumerate_compositions(0, true), vec![Composition::empty()]);
        assert_eq!(enumerate_compositions(0, false), vec![Composition::empty()]);
        assert_eq!(
            enumerate_compositions(4, true),
            vec![c(&[4]), c(&[2, 2]), c(&[3, 1]), c(&[2, 1, 1])]
        );
        assert!(enumerate_compositions(1, true).is_empty());
    }

    // Independent generator: binary cut patterns of n−1 gaps.
    fn compositions_by_cuts(n: u32) -> Vec<Composition> {
        if n == 0 {
            return vec![Composition::empty()];
        }
        (0u32..1 << (n - 1))
            .map(|mask| {
                let mut parts = Vec::new();
                let mut run = 1;
                for gap in 0..n - 1 {
                    if mask & (1 << gap) != 0 {
                        parts.push(run);
                        run = 1;
                    } else {
                        run += 1;
                    }
                }
                parts.push(run);
                c(&parts)
            })
            .collect()
    }

    #[test]
    fn enumeration_counts_match_cut_oracle() {
        for n in 0..=12u32 {
            let mut oracle = compositions_by_cuts(n);
            oracle.sort();
            let all = enumerate_compositions(n, false);
            assert_eq!(all, oracle, "weight {n}");
            let expected_all = if n == 0 { 1 } else { 1usize << (n - 1) };
            assert_eq!(all.len(), expected_all);

            let conv = enumerate_compositions(n, true);
            let filtered: Vec<_> = oracle.into_iter().filter(|c| c.is_convergent()).collect();
            assert_eq!(conv, filtered);
            let expected_conv = match n {
                0 => 1,
                1 => 0,
                _ => 1usize << (n - 2),
            };
            assert_eq!(conv.len(), expected_conv, "weight {n}");
        }
    }

    #[test]
    fn canonical_order_is_depth_then_lex() {
        let mut v = vec![
            c(&[1, 3]),
            c(&[4]),
            c(&[2, 1, 1]),
            c(&[3, 1]),
            Composition::empty(),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Composition::empty(),
                c(&[4]),
                c(&[1, 3]),
                c(&[3, 1]),
                c(&[2, 1, 1])
            ]
        );
    }

    #[test]
    fn sum_combine_examples() {
        let two = FormalSum::monomial(c(&[2]));
        assert!(sum_combine(&two, &two, &rat(-1)).is_zero());

        let half_three = FormalSum::term(c(&[3]), ratio(1, 2));
        let got = sum_combine(&two, &half_three, &rat(2));
        assert_eq!(got.coeff(&c(&[2])), rat(1));
        assert_eq!(got.coeff(&c(&[3])), rat(1));
        assert_eq!(got.len(), 2);

        let x = FormalSum::from_iter([(c(&[2, 1]), ratio(3, 4)), (c(&[5]), rat(-2))]);
        let q = ratio(-7, 3);
        assert_eq!(sum_combine(&FormalSum::zero(), &x, &q), x.scaled(&q));
    }

    #[test]
    fn serial_format() {
        let x = FormalSum::from_iter([(c(&[2, 1]), ratio(-1, 2)), (c(&[4]), rat(3))]);
        assert_eq!(
            x.to_json(),
            r#"[{"coeff":"3","composition":[4]},{"coeff":"-1/2","composition":[2,1]}]"#
        );
        assert_eq!(FormalSum::from_json(&x.to_json()).unwrap(), x);
        assert!(FormalSum::from_json(r#"[{"coeff":"1","composition":[0]}]"#).is_err());
        assert!(FormalSum::from_json(r#"[{"coeff":"1/0","composition":[2]}]"#).is_err());
    }

    #[test]
    fn display() {
        let x = FormalSum::from_iter([(c(&[2, 2]), rat(2)), (c(&[4]), rat(1))]);
        assert_eq!(x.to_string(), "(4) + 2*(2,2)");
        let y = FormalSum::from_iter([(c(&[2, 2]), ratio(-1, 2))]);
        assert_eq!(y.to_string(), "-1/2*(2,2)");
        assert_eq!(FormalSum::zero().to_string(), "0");
    }

    fn arb_composition() -> impl Strategy<Value = Composition> {
        prop::collection::vec(1u32..6, 0..5).prop_map(|v| c(&v))
    }

    fn arb_sum() -> impl Strategy<Value = FormalSum> {
        prop::collection::vec((arb_composition(), -3i64..4, 1i64..4), 0..6).prop_map(|terms| {
            terms
                .into_iter()
                .map(|(c, n, d)| (c, ratio(n, d)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(parts in prop::collection::vec(1u32..1000, 0..8)) {
            let comp = c(&parts);
            prop_assert_eq!(parse_composition(&comp.to_text()).unwrap(), comp);
        }

        #[test]
        fn formal_sum_arithmetic(a in arb_sum(), b in arb_sum(), x in arb_sum()) {
            let one = rat(1);
            // commutativity
            prop_assert_eq!(sum_combine(&a, &b, &one), sum_combine(&b, &a, &one));
            // associativity
            let left = sum_combine(&sum_combine(&a, &b, &one), &x, &one);
            let right = sum_combine(&a, &sum_combine(&b, &x, &one), &one);
            prop_assert_eq!(&left, &right);
            // no stored zeros, including after cancellation
            let cancel = sum_combine(&left, &right, &rat(-1));
            prop_assert!(cancel.is_zero());
            for (_, q) in left.iter() {
                prop_assert!(!q.is_zero());
            }
        }

        #[test]
        fn serial_round_trip(a in arb_sum()) {
            prop_assert_eq!(FormalSum::from_json(&a.to_json()).unwrap(), a);
        }
    }
}
