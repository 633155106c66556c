//! Weight-graded structure of the convergent stuffle algebra: dimensions,
//! a greedy choice of polynomial generators, unique normal forms, and a
//! freeness report.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{
    enumerate_compositions, parse_rational, Composition, FormalSum, ParseError,
};
use crate::linalg::{bareiss_rank, rational_inverse, IntEchelon};
use crate::lyndon::count_lyndon;
use crate::stuffle::expand_monomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("max weight must be ≥ 2 (got {0})")]
    MaxWeightTooSmall(u32),
    #[error("{0} is not convergent (first part must be ≥ 2)")]
    NotConvergent(Composition),
    #[error("weight {weight} exceeds the table's max weight {max_weight}")]
    WeightExceedsTable { weight: u64, max_weight: u32 },
    #[error("generator monomials of weight {0} do not form a basis")]
    NotABasis(u32),
    #[error("generator {generator} listed at weight {listed} has weight {actual}")]
    MisplacedGenerator {
        generator: Composition,
        listed: u32,
        actual: u64,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Dimension of the weight-`n` component: the number of convergent
/// compositions of weight `n`.
pub fn dimension(weight: u32) -> BigInt {
    // count[m] = number of compositions of m (any first part)
    let n = weight as usize;
    let mut count = vec![BigInt::zero(); n + 1];
    count[0] = BigInt::one();
    for m in 1..=n {
        count[m] = (0..m).map(|k| count[k].clone()).sum();
    }
    if n == 0 {
        return BigInt::one();
    }
    (2..=n).map(|first| count[n - first].clone()).sum()
}

/// A product of generators with multiplicities.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(BTreeMap<Composition, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn generator(c: Composition) -> Self {
        Monomial([(c, 1)].into_iter().collect())
    }

    pub fn from_exponents(exponents: BTreeMap<Composition, u32>) -> Self {
        Monomial(exponents.into_iter().filter(|&(_, k)| k > 0).collect())
    }

    pub fn exponents(&self) -> &BTreeMap<Composition, u32> {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Σ exponent · weight(generator).
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|(c, &k)| c.weight() * u64::from(k)).sum()
    }

    /// Number of generator factors counted with multiplicity.
    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn expand(&self) -> FormalSum {
        expand_monomial(&self.0)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let factors: Vec<String> = self
            .0
            .iter()
            .map(|(c, &k)| {
                if k == 1 {
                    format!("G{c}")
                } else {
                    format!("G{c}^{k}")
                }
            })
            .collect();
        write!(f, "{}", factors.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Polynomial in generator compositions with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct GeneratorPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl GeneratorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), q);
        p
    }

    pub fn add_term(&mut self, m: Monomial, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Expansion in the monomial quasi-symmetric basis via stuffle products.
    pub fn expand(&self) -> FormalSum {
        let mut out = FormalSum::zero();
        for (m, q) in &self.terms {
            out.add_scaled(&m.expand(), q);
        }
        out
    }

    /// `Some(w)` when every monomial has total weight `w`.
    pub fn homogeneous_weight(&self) -> Option<u64> {
        let mut weights = self.terms.keys().map(Monomial::weight);
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first)
    }

    pub fn to_serial(&self) -> Vec<SerialPolyTerm> {
        self.terms
            .iter()
            .map(|(m, q)| SerialPolyTerm {
                coeff: q.to_string(),
                monomial: m
                    .0
                    .iter()
                    .map(|(c, &k)| SerialFactor {
                        generator: c.parts().to_vec(),
                        exponent: k,
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn from_serial(terms: &[SerialPolyTerm]) -> Result<Self, ParseError> {
        let mut p = Self::zero();
        for t in terms {
            let mut exps = BTreeMap::new();
            for f in &t.monomial {
                *exps
                    .entry(Composition::new(f.generator.clone())?)
                    .or_insert(0) += f.exponent;
            }
            p.add_term(Monomial::from_exponents(exps), parse_rational(&t.coeff)?);
        }
        Ok(p)
    }
}

impl fmt::Display for GeneratorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, q)) in self.terms.iter().enumerate() {
            let negative = q < &BigRational::zero();
            let mag = if negative { -q.clone() } else { q.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (mag.is_one(), m.is_one()) {
                (true, _) => write!(f, "{m}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{m}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GeneratorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratorPolynomial[{self}]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialFactor {
    pub generator: Vec<u32>,
    pub exponent: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialPolyTerm {
    pub coeff: String,
    pub monomial: Vec<SerialFactor>,
}

/// Reduction data for one weight.
#[derive(Debug, Clone)]
struct Layer {
    generators: Vec<Composition>,
    /// Convergent compositions of this weight, canonical order.
    basis: Vec<Composition>,
    /// Generator monomials of this weight; products first, then the new
    /// generators.
    monomials: Vec<Monomial>,
    /// `inverse[m][b]`: coefficient of `monomials[m]` in the normal form of
    /// `basis[b]`.
    inverse: Vec<Vec<BigRational>>,
}

/// Per-weight generators plus the data needed to rewrite any convergent
/// composition as a polynomial in them.
#[derive(Debug, Clone)]
pub struct GeneratorTable {
    max_weight: u32,
    layers: Vec<Layer>,
}

impl PartialEq for GeneratorTable {
    fn eq(&self, other: &Self) -> bool {
        self.max_weight == other.max_weight
            && self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.generators == b.generators && a.monomials == b.monomials && a.inverse == b.inverse
            })
    }
}

/// Monomials of total weight `n` in the given generators (each generator
/// weight ≥ 1), in a deterministic order.
fn monomials_of_weight(gens: &[Composition], n: u64) -> Vec<Monomial> {
    fn go(
        gens: &[Composition],
        start: usize,
        remaining: u64,
        acc: &mut BTreeMap<Composition, u32>,
        out: &mut Vec<Monomial>,
    ) {
        if remaining == 0 {
            out.push(Monomial(acc.clone()));
            return;
        }
        for i in start..gens.len() {
            let w = gens[i].weight();
            if w > remaining {
                continue;
            }
            *acc.entry(gens[i].clone()).or_insert(0) += 1;
            go(gens, i, remaining - w, acc, out);
            let e = acc.get_mut(&gens[i]).expect("just inserted");
            *e -= 1;
            if *e == 0 {
                acc.remove(&gens[i]);
            }
        }
    }
    let mut out = Vec::new();
    go(gens, 0, n, &mut BTreeMap::new(), &mut out);
    out
}

fn coordinates(sum: &FormalSum, basis: &[Composition]) -> Vec<BigInt> {
    basis
        .iter()
        .map(|c| {
            let q = sum.coeff(c);
            debug_assert!(
                q.is_integer(),
                "stuffle expansions have integer coefficients"
            );
            q.to_integer()
        })
        .collect()
}

fn unit_vector(len: usize, at: usize) -> Vec<BigInt> {
    (0..len)
        .map(|i| {
            if i == at {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
        .collect()
}

impl GeneratorTable {
    /// Greedy construction, weight by weight, in canonical composition order.
    pub fn build(max_weight: u32) -> Result<Self, TableError> {
        if max_weight < 2 {
            return Err(TableError::MaxWeightTooSmall(max_weight));
        }
        let mut layers: Vec<Layer> = Vec::new();
        let mut previous: Vec<Composition> = Vec::new();
        for n in 0..=max_weight {
            let basis = enumerate_compositions(n, true);
            let products = Self::products(&previous, n);
            let mut echelon = IntEchelon::new();
            for m in &products {
                echelon.insert(coordinates(&m.expand(), &basis));
            }
            let generators: Vec<Composition> = if n < 2 {
                Vec::new()
            } else {
                basis
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| echelon.insert(unit_vector(basis.len(), i)))
                    .map(|(_, c)| c.clone())
                    .collect()
            };
            let layer = Self::layer(n, basis, products, generators)?;
            previous.extend(layer.generators.iter().cloned());
            layers.push(layer);
        }
        Ok(GeneratorTable { max_weight, layers })
    }

    /// Rebuilds a table from explicit per-weight generator lists (index =
    /// weight), validating that every weight gets a monomial basis.
    pub fn from_generators(
        max_weight: u32,
        per_weight: &[Vec<Composition>],
    ) -> Result<Self, TableError> {
        if max_weight < 2 {
            return Err(TableError::MaxWeightTooSmall(max_weight));
        }
        let mut layers = Vec::new();
        let mut previous: Vec<Composition> = Vec::new();
        for n in 0..=max_weight {
            let gens = per_weight.get(n as usize).cloned().unwrap_or_default();
            for g in &gens {
                if !g.is_convergent() || g.is_empty() {
                    return Err(TableError::NotConvergent(g.clone()));
                }
                if g.weight() != u64::from(n) {
                    return Err(TableError::MisplacedGenerator {
                        generator: g.clone(),
                        listed: n,
                        actual: g.weight(),
                    });
                }
            }
            let basis = enumerate_compositions(n, true);
            let products = Self::products(&previous, n);
            let layer = Self::layer(n, basis, products, gens)?;
            previous.extend(layer.generators.iter().cloned());
            layers.push(layer);
        }
        Ok(GeneratorTable { max_weight, layers })
    }

    /// Monomials of weight `n` with at least two factors (or the empty
    /// monomial at weight 0).
    fn products(previous: &[Composition], n: u32) -> Vec<Monomial> {
        if n == 0 {
            return vec![Monomial::one()];
        }
        monomials_of_weight(previous, u64::from(n))
    }

    fn layer(
        n: u32,
        basis: Vec<Composition>,
        mut monomials: Vec<Monomial>,
        generators: Vec<Composition>,
    ) -> Result<Layer, TableError> {
        monomials.extend(generators.iter().cloned().map(Monomial::generator));
        if monomials.len() != basis.len() {
            return Err(TableError::NotABasis(n));
        }
        // columns = monomial expansions
        let matrix: Vec<Vec<BigRational>> = {
            let cols: Vec<Vec<BigInt>> = monomials
                .iter()
                .map(|m| coordinates(&m.expand(), &basis))
                .collect();
            (0..basis.len())
                .map(|r| {
                    cols.iter()
                        .map(|col| BigRational::from_integer(col[r].clone()))
                        .collect()
                })
                .collect()
        };
        let inverse = rational_inverse(&matrix).ok_or(TableError::NotABasis(n))?;
        Ok(Layer {
            generators,
            basis,
            monomials,
            inverse,
        })
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    /// Generators chosen at weight `n` (empty beyond the table).
    pub fn generators(&self, n: u32) -> &[Composition] {
        self.layers
            .get(n as usize)
            .map_or(&[][..], |l| l.generators.as_slice())
    }

    /// All generators, by increasing weight.
    pub fn all_generators(&self) -> Vec<Composition> {
        self.layers
            .iter()
            .flat_map(|l| l.generators.iter().cloned())
            .collect()
    }

    /// Generator monomials spanning weight `n`.
    pub fn monomials(&self, n: u32) -> &[Monomial] {
        self.layers
            .get(n as usize)
            .map_or(&[][..], |l| l.monomials.as_slice())
    }

    pub fn to_serial(&self) -> SerialTable {
        SerialTable {
            max_weight: self.max_weight,
            weights: self
                .layers
                .iter()
                .enumerate()
                .map(|(n, l)| SerialWeight {
                    weight: n as u32,
                    generators: l.generators.iter().map(|g| g.parts().to_vec()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_serial(s: &SerialTable) -> Result<Self, TableError> {
        let mut per_weight = vec![Vec::new(); s.max_weight as usize + 1];
        for w in &s.weights {
            let slot =
                per_weight
                    .get_mut(w.weight as usize)
                    .ok_or(TableError::WeightExceedsTable {
                        weight: u64::from(w.weight),
                        max_weight: s.max_weight,
                    })?;
            for g in &w.generators {
                slot.push(Composition::new(g.clone())?);
            }
        }
        Self::from_generators(s.max_weight, &per_weight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialWeight {
    pub weight: u32,
    pub generators: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialTable {
    pub max_weight: u32,
    pub weights: Vec<SerialWeight>,
}

pub fn build_generator_table(max_weight: u32) -> Result<GeneratorTable, TableError> {
    GeneratorTable::build(max_weight)
}

/// The unique polynomial in the table's generators whose stuffle expansion
/// is `{c: 1}`.
pub fn reduce_to_normal_form(
    c: &Composition,
    table: &GeneratorTable,
) -> Result<GeneratorPolynomial, TableError> {
    if !c.is_convergent() {
        return Err(TableError::NotConvergent(c.clone()));
    }
    let weight = c.weight();
    if weight > u64::from(table.max_weight) {
        return Err(TableError::WeightExceedsTable {
            weight,
            max_weight: table.max_weight,
        });
    }
    let layer = &table.layers[weight as usize];
    let col = layer
        .basis
        .binary_search(c)
        .expect("convergent composition is in its weight's basis");
    let mut poly = GeneratorPolynomial::zero();
    for (m, row) in layer.monomials.iter().zip(&layer.inverse) {
        poly.add_term(m.clone(), row[col].clone());
    }
    Ok(poly)
}

/// One weight's line of the freeness report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessRow {
    pub weight: u32,
    pub dimension: String,
    /// `2^(n−1)` for comparison; the computed dimensions follow `2^(n−2)`.
    pub doubling_formula: String,
    pub generators: usize,
    pub lyndon_count: String,
    pub monomials: usize,
    pub rank: usize,
    pub euler_coefficient: String,
    /// (i) monomial expansions are linearly independent.
    pub independent: bool,
    /// (ii) they span the weight component; Euler product matches.
    pub spans: bool,
    /// (iii) generator count equals the Lyndon count.
    pub lyndon_match: bool,
}

impl FreenessRow {
    pub fn passed(&self) -> bool {
        self.independent && self.spans && self.lyndon_match
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub max_weight: u32,
    pub rows: Vec<FreenessRow>,
    pub all_pass: bool,
    /// Set when some weight n ≥ 2 has dimension ≠ 2^(n−1).
    pub doubling_formula_fails: bool,
    pub note: String,
}

/// Coefficients of `Π_{k≥2} (1 − t^k)^{−g_k}` up to `t^max`.
pub fn euler_product(generator_counts: &[usize], max: usize) -> Vec<BigInt> {
    let mut series = vec![BigInt::zero(); max + 1];
    series[0] = BigInt::one();
    for (k, &g) in generator_counts.iter().enumerate() {
        if k == 0 {
            continue;
        }
        for _ in 0..g {
            for n in k..=max {
                let add = series[n - k].clone();
                series[n] += add;
            }
        }
    }
    series
}

/// Checks, weight by weight, that the greedy generators make the convergent
/// algebra free with Lyndon-counted generators.
pub fn verify_freeness(max_weight: u32) -> Result<FreenessReport, TableError> {
    let table = GeneratorTable::build(max_weight)?;
    let counts: Vec<usize> = (0..=max_weight)
        .map(|n| table.generators(n).len())
        .collect();
    let euler = euler_product(&counts, max_weight as usize);
    let mut rows = Vec::new();
    for n in 0..=max_weight {
        let basis = enumerate_compositions(n, true);
        let monomials = table.monomials(n);
        let matrix: Vec<Vec<BigInt>> = monomials
            .iter()
            .map(|m| coordinates(&m.expand(), &basis))
            .collect();
        let rank = bareiss_rank(matrix);
        let dim = dimension(n);
        let lyndon = if n >= 2 {
            count_lyndon(n).expect("n ≥ 2")
        } else {
            BigInt::zero()
        };
        let doubling = if n == 0 {
            BigInt::one()
        } else {
            BigInt::one() << (n as usize - 1)
        };
        let g = counts[n as usize];
        rows.push(FreenessRow {
            weight: n,
            dimension: dim.to_string(),
            doubling_formula: doubling.to_string(),
            generators: g,
            lyndon_count: lyndon.to_string(),
            monomials: monomials.len(),
            rank,
            euler_coefficient: euler[n as usize].to_string(),
            independent: rank == monomials.len(),
            spans: BigInt::from(rank) == dim && euler[n as usize] == dim,
            lyndon_match: BigInt::from(g) == lyndon,
        });
    }
    let all_pass = rows.iter().all(FreenessRow::passed);
    let doubling_formula_fails = rows
        .iter()
        .any(|r| r.weight >= 2 && r.dimension != r.doubling_formula);
    let note = if doubling_formula_fails {
        "dimensions follow 2^(n-2) for n >= 2 (1, 0 at n = 0, 1); the formula 2^(n-1) does not hold"
            .to_string()
    } else {
        "dimensions agree with 2^(n-1)".to_string()
    };
    Ok(FreenessReport {
        max_weight,
        rows,
        all_pass,
        doubling_formula_fails,
        note,
    })
}

/// Dimension sequence `dimension(0..=max)` as machine integers (panics on
/// overflow past 2^127).
pub fn dimension_sequence(max: u32) -> Vec<u128> {
    (0..=max)
        .map(|n| dimension(n).to_u128().expect("dimension fits in u128"))
        .collect()
}

/// Dimensions `0..=max_weight` next to the doubling formula `2^(n−1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimensions: Vec<String>,
    pub doubling_formula: Vec<String>,
    /// Weights `n ≥ 2` where the two disagree.
    pub deviating_weights: Vec<u32>,
    pub note: String,
}

pub fn dimension_report(max_weight: u32) -> DimensionReport {
    let dimensions: Vec<BigInt> = (0..=max_weight).map(dimension).collect();
    let doubling: Vec<BigInt> = (0..=max_weight)
        .map(|n| {
            if n == 0 {
                BigInt::one()
            } else {
                BigInt::one() << (n as usize - 1)
            }
        })
        .collect();
    let deviating_weights: Vec<u32> = (2..=max_weight)
        .filter(|&n| dimensions[n as usize] != doubling[n as usize])
        .collect();
    let note = if deviating_weights.is_empty() {
        "dimensions agree with 2^(n-1)".to_string()
    } else {
        "dimensions follow 2^(n-2) for n >= 2 (1, 0 at n = 0, 1); the formula 2^(n-1) does not hold"
            .to_string()
    };
    DimensionReport {
        dimensions: dimensions.iter().map(ToString::to_string).collect(),
        doubling_formula: doubling.iter().map(ToString::to_string).collect(),
        deviating_weights,
        note,
    }
}
