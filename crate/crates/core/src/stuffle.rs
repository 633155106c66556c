//! The stuffle (quasi-shuffle) product on the monomial basis.
//!
//! `∅ ⋆ w = w ⋆ ∅ = w` and
//! `(x·u) ⋆ (y·v) = x·(u ⋆ y·v) + y·(x·u ⋆ v) + (x+y)·(u ⋆ v)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::composition::{Composition, FormalSum};

/// Expansion of `a ⋆ b` in the monomial basis.
///
/// Evaluated bottom-up over pairs of suffixes, so each suffix pair is
/// expanded once.
pub fn stuffle(a: &Composition, b: &Composition) -> FormalSum {
    let (xs, ys) = (a.parts(), b.parts());
    let (la, lb) = (xs.len(), ys.len());
    // row[j] holds the expansion of xs[i..] ⋆ ys[j..] for the current i.
    let mut below: Vec<FormalSum> = (0..=lb)
        .map(|j| FormalSum::monomial(Composition::from_parts(&ys[j..])))
        .collect();
    for i in (0..la).rev() {
        let mut row = vec![FormalSum::zero(); lb + 1];
        row[lb] = FormalSum::monomial(Composition::from_parts(&xs[i..]));
        for j in (0..lb).rev() {
            let (x, y) = (xs[i], ys[j]);
            let mut acc = below[j].prepend(x);
            let one = BigRational::one();
            acc.add_scaled(&row[j + 1].prepend(y), &one);
            acc.add_scaled(&below[j + 1].prepend(x + y), &one);
            row[j] = acc;
        }
        below = row;
    }
    below.swap_remove(0)
}

/// Bilinear extension: `Σ A[a]·B[b]·(a ⋆ b)`.
pub fn stuffle_bilinear(lhs: &FormalSum, rhs: &FormalSum) -> FormalSum {
    let mut out = FormalSum::zero();
    for (a, p) in lhs.iter() {
        for (b, q) in rhs.iter() {
            out.add_scaled(&stuffle(a, b), &(p * q));
        }
    }
    out
}

/// `a^{⋆k}`, with `a^{⋆0} = {∅: 1}`.
pub fn stuffle_power(a: &Composition, k: u32) -> FormalSum {
    let base = FormalSum::monomial(a.clone());
    let mut acc = FormalSum::one();
    for _ in 0..k {
        acc = stuffle_bilinear(&acc, &base);
    }
    acc
}

/// Expands `Π key^{⋆exponent}` in the monomial basis.
pub fn expand_monomial(exponents: &BTreeMap<Composition, u32>) -> FormalSum {
    exponents.iter().fold(FormalSum::one(), |acc, (c, &k)| {
        stuffle_bilinear(&acc, &stuffle_power(c, k))
    })
}

/// Integer-coefficient check used by invariants: every coefficient of a
/// product of compositions is a positive integer.
pub fn has_positive_integer_coefficients(sum: &FormalSum) -> bool {
    sum.iter()
        .all(|(_, q)| q.is_integer() && q.numer() > &BigInt::from(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{enumerate_compositions, rat};

    fn c(parts: &[u32]) -> Composition {
        Composition::from_parts(parts)
    }

    fn sum(terms: &[(i64, &[u32])]) -> FormalSum {
        terms.iter().map(|&(q, p)| (c(p), rat(q))).collect()
    }

    /// Brute force: a term of `a ⋆ b` is a pair of strictly increasing maps
    /// `[la] → [k]`, `[lb] → [k]` whose images cover `[k]`.
    fn stuffle_oracle(a: &Composition, b: &Composition) -> FormalSum {
        let (la, lb) = (a.depth(), b.depth());
        let mut out = FormalSum::zero();
        for k in la.max(lb)..=la + lb {
            for ma in 0u32..1 << k {
                if ma.count_ones() as usize != la {
                    continue;
                }
                for mb in 0u32..1 << k {
                    if mb.count_ones() as usize != lb || (ma | mb) != (1 << k) - 1 {
                        continue;
                    }
                    let mut letters = vec![0u32; k];
                    let (mut ia, mut ib) = (0, 0);
                    for (slot, letter) in letters.iter_mut().enumerate() {
                        if ma & (1 << slot) != 0 {
                            *letter += a.parts()[ia];
                            ia += 1;
                        }
                        if mb & (1 << slot) != 0 {
                            *letter += b.parts()[ib];
                            ib += 1;
                        }
                    }
                    out.add_term(Composition::from_parts(&letters), rat(1));
                }
            }
        }
        out
    }

    #[test]
    fn product_examples() {
        assert_eq!(
            stuffle(&c(&[2]), &c(&[3])),
            sum(&[(1, &[2, 3]), (1, &[3, 2]), (1, &[5])])
        );
        assert_eq!(
            stuffle(&Composition::empty(), &c(&[2, 1])),
            sum(&[(1, &[2, 1])])
        );
        assert_eq!(
            stuffle(&c(&[2, 1]), &Composition::empty()),
            sum(&[(1, &[2, 1])])
        );
        assert_eq!(stuffle(&c(&[2]), &c(&[2])), sum(&[(2, &[2, 2]), (1, &[4])]));
        assert_eq!(
            stuffle(&c(&[2, 1]), &c(&[2])),
            sum(&[(1, &[2, 1, 2]), (2, &[2, 2, 1]), (1, &[2, 3]), (1, &[4, 1])])
        );
        assert_eq!(
            stuffle(&Composition::empty(), &Composition::empty()),
            FormalSum::one()
        );
    }

    #[test]
    fn bilinear_examples() {
        let got = stuffle_bilinear(&sum(&[(1, &[2])]), &sum(&[(1, &[3])]));
        assert_eq!(got, sum(&[(1, &[2, 3]), (1, &[3, 2]), (1, &[5])]));
        let b = sum(&[(3, &[2, 1]), (-1, &[4])]);
        assert!(stuffle_bilinear(&FormalSum::zero(), &b).is_zero());
        let q = crate::composition::ratio(5, 7);
        let unit = FormalSum::term(Composition::empty(), q.clone());
        assert_eq!(stuffle_bilinear(&unit, &b), b.scaled(&q));
    }

    #[test]
    fn power_examples() {
        assert_eq!(stuffle_power(&c(&[2]), 0), FormalSum::one());
        assert_eq!(stuffle_power(&c(&[2]), 1), sum(&[(1, &[2])]));
        assert_eq!(stuffle_power(&c(&[2]), 2), stuffle(&c(&[2]), &c(&[2])));
        assert_eq!(
            stuffle_power(&c(&[2]), 3),
            sum(&[(6, &[2, 2, 2]), (3, &[2, 4]), (3, &[4, 2]), (1, &[6])])
        );
    }

    #[test]
    fn expand_monomial_examples() {
        let m: BTreeMap<_, _> = [(c(&[2]), 2)].into_iter().collect();
        assert_eq!(expand_monomial(&m), sum(&[(2, &[2, 2]), (1, &[4])]));
        assert_eq!(expand_monomial(&BTreeMap::new()), FormalSum::one());
        let m: BTreeMap<_, _> = [(c(&[2]), 1), (c(&[3]), 1)].into_iter().collect();
        assert_eq!(expand_monomial(&m), stuffle(&c(&[2]), &c(&[3])));
    }

    #[test]
    fn recursion_matches_brute_force_oracle() {
        // all compositions of depth ≤ 3 up to weight 6 on each side
        let comps: Vec<_> = (0..=6)
            .flat_map(|w| enumerate_compositions(w, false))
            .filter(|c| c.depth() <= 3)
            .collect();
        for a in &comps {
            for b in &comps {
                assert_eq!(stuffle(a, b), stuffle_oracle(a, b), "{a} ⋆ {b}");
            }
        }
    }

    #[test]
    fn structural_invariants_small() {
        let comps: Vec<_> = (0..=6)
            .flat_map(|w| enumerate_compositions(w, false))
            .collect();
        for a in &comps {
            for b in &comps {
                if a.weight() + b.weight() > 7 {
                    continue;
                }
                let p = stuffle(a, b);
                assert!(has_positive_integer_coefficients(&p));
                for (t, _) in p.iter() {
                    assert_eq!(t.weight(), a.weight() + b.weight());
                    assert!(t.depth() >= a.depth().max(b.depth()));
                    assert!(t.depth() <= a.depth() + b.depth());
                    if a.is_convergent() && b.is_convergent() {
                        assert!(t.is_convergent(), "{a} ⋆ {b} produced {t}");
                    }
                }
            }
        }
    }
}
