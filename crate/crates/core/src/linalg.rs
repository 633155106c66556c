//! Exact linear algebra over ℤ and ℚ: fraction-free elimination for rank and
//! span tests, Gauss–Jordan for inverses.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Row echelon basis over ℤ, grown one vector at a time.
///
/// Each stored row vanishes at the pivots of all rows stored before it,
/// so reducing a vector against the rows in insertion order clears every
/// pivot.
#[derive(Debug, Clone, Default)]
pub struct IntEchelon {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl IntEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let g = row[*pivot].gcd(&v[*pivot]);
            let scale_v = &row[*pivot] / &g;
            let scale_row = &v[*pivot] / &g;
            for (x, r) in v.iter_mut().zip(row) {
                *x = &*x * &scale_v - r * &scale_row;
            }
            primitive_part(&mut v);
        }
        v
    }

    /// `true` iff `v` lies in the span of the stored rows.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v.to_vec()).iter().all(Zero::is_zero)
    }

    /// Inserts `v` if it is independent of the stored rows; returns whether
    /// it was inserted.
    pub fn insert(&mut self, v: Vec<BigInt>) -> bool {
        let mut reduced = self.reduce(v);
        match reduced.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(pivot) => {
                primitive_part(&mut reduced);
                self.rows.push((pivot, reduced));
                true
            }
        }
    }
}

fn primitive_part(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// Rank of an integer matrix by Bareiss fraction-free elimination.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Inverse of a square rational matrix, or `None` when singular.
pub fn rational_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn bareiss_rank_small() {
        assert_eq!(bareiss_rank(ints(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(bareiss_rank(ints(&[&[1, 2], &[3, 4]])), 2);
        assert_eq!(bareiss_rank(ints(&[&[0, 0, 0], &[0, 0, 0]])), 0);
        assert_eq!(bareiss_rank(ints(&[&[0, 1, 2], &[0, 2, 4], &[1, 0, 0]])), 2);
        assert_eq!(
            bareiss_rank(ints(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2], &[1, 1, 1]])),
            3
        );
    }

    #[test]
    fn echelon_span_test() {
        let mut e = IntEchelon::new();
        assert!(e.insert(ints(&[&[2, 0, 1]]).remove(0)));
        assert!(!e.insert(ints(&[&[4, 0, 2]]).remove(0)));
        assert!(e.insert(ints(&[&[0, 0, 1]]).remove(0)));
        assert!(e.contains(&ints(&[&[1, 0, 0]])[0]));
        assert!(!e.contains(&ints(&[&[0, 1, 0]])[0]));
        assert_eq!(e.rank(), 2);
    }

    #[test]
    fn inverse_round_trip() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let m = vec![
            vec![q(2, 1), q(1, 1), q(0, 1)],
            vec![q(1, 2), q(0, 1), q(3, 1)],
            vec![q(0, 1), q(1, 3), q(1, 1)],
        ];
        let inv = rational_inverse(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: BigRational = (0..3).map(|k| &m[i][k] * &inv[k][j]).sum();
                assert_eq!(s, if i == j { q(1, 1) } else { q(0, 1) });
            }
        }
        let singular = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(rational_inverse(&singular).is_none());
    }
}
