//! Numerical checks of identities satisfied by `He`: the difference
//! equation, stuffle products, normal-form reduction, and sampled
//! evidence of linear independence over polynomials in `z`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::Composition;
use crate::graded::{reduce_to_normal_form, GeneratorTable, TableError};
use crate::hurwitz::{
    eval_hmzf, eval_polynomial, min_tolerance, point, product_error, EvalError, EvalRequest,
    EvalResult, SerialComplex, DEFAULT_PRECISION,
};
use crate::mp::{Complex, Real};
use crate::stuffle::stuffle;

/// Precision of the entries of an independence matrix.
pub const CERTIFICATE_PRECISION: u32 = 40;
/// Singular values below this multiple of the largest normalized entry
/// error count as zero.
pub const RANK_THRESHOLD_FACTOR: f64 = 1e6;
pub const POINT_SLACK: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("the kernel J is undefined at z = 0")]
    ZeroArgument,
    #[error("{0} is not a nonempty convergent composition")]
    NotConvergent(Composition),
    #[error("need at least {needed} sample points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("sample points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("no candidates given")]
    NoCandidates,
}

/// Something that can be evaluated at a complex point.
pub trait Evaluable {
    fn eval(&self, z: &Complex) -> Result<Complex, EvalError>;
}

impl<F> Evaluable for F
where
    F: Fn(&Complex) -> Result<Complex, EvalError>,
{
    fn eval(&self, z: &Complex) -> Result<Complex, EvalError> {
        self(z)
    }
}

/// `z ↦ He^c(z)` at fixed tolerance and precision.
#[derive(Debug, Clone)]
pub struct HmzfFunction {
    pub composition: Composition,
    pub tolerance: f64,
    pub precision: u32,
}

impl HmzfFunction {
    pub fn new(composition: Composition) -> Self {
        HmzfFunction {
            composition,
            tolerance: crate::hurwitz::DEFAULT_TOLERANCE,
            precision: DEFAULT_PRECISION,
        }
    }
}

impl Evaluable for HmzfFunction {
    fn eval(&self, z: &Complex) -> Result<Complex, EvalError> {
        let req = EvalRequest::new(self.composition.clone(), z.clone())
            .with_tolerance(self.tolerance)
            .with_precision(self.precision);
        Ok(eval_hmzf(&req)?.value)
    }
}

/// `Δ₋f(z) = f(z−1) − f(z)`.
pub fn difference_operator(f: &dyn Evaluable, z: &Complex) -> Result<Complex, LabError> {
    let shifted = z.add_real(&Real::from_i64(-1, z.prec().max(64)));
    Ok(f.eval(&shifted)? - f.eval(z)?)
}

/// `J^c(z)`: `z^{-s1}` for depth 1, zero otherwise.
pub fn j_kernel(c: &Composition, z: &Complex) -> Result<Complex, LabError> {
    if z.is_zero() {
        return Err(LabError::ZeroArgument);
    }
    let prec = z.prec().max(128);
    match c.parts() {
        [s] => Ok(z.with_prec(prec).inv().powu(*s)),
        _ => Ok(Complex::zero(prec)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub description: String,
    pub points: Vec<SerialComplex>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckReport {
    fn new(description: String, points: &[Complex], residuals: Vec<f64>, tolerance: f64) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let verdict = if max_residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckReport {
            description,
            points: points.iter().map(serial_point).collect(),
            residuals,
            max_residual,
            tolerance,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn serial_point(z: &Complex) -> SerialComplex {
    SerialComplex::from_complex(z, 20)
}

fn check_tolerance(tolerance: f64) -> f64 {
    (tolerance / 100.0).max(min_tolerance(DEFAULT_PRECISION))
}

fn he(c: &Composition, z: &Complex, tolerance: f64) -> Result<EvalResult, EvalError> {
    eval_hmzf(
        &EvalRequest::new(c.clone(), z.clone())
            .with_tolerance(tolerance)
            .with_precision(DEFAULT_PRECISION),
    )
}

fn require_convergent(c: &Composition) -> Result<(), LabError> {
    if c.is_empty() || !c.is_convergent() {
        return Err(LabError::NotConvergent(c.clone()));
    }
    Ok(())
}

/// Residuals of `Δ₋He^c(z) = z^{-s_r}·He^{c'}(z)`, where `c'` drops the
/// last part `s_r`.
pub fn check_difference_equation(
    c: &Composition,
    points: &[Complex],
    tolerance: f64,
) -> Result<CheckReport, LabError> {
    require_convergent(c)?;
    let inner = check_tolerance(tolerance);
    let f = HmzfFunction {
        composition: c.clone(),
        tolerance: inner,
        precision: DEFAULT_PRECISION,
    };
    let last = c.last().expect("nonempty");
    let prefix = c.drop_last();
    let mut residuals = Vec::with_capacity(points.len());
    for z in points {
        let lhs = difference_operator(&f, z)?;
        let rhs = he(&prefix, z, inner)?.value * z.with_prec(128).inv().powu(last);
        residuals.push((&lhs - &rhs).abs_f64());
    }
    let description = format!("Δ₋He^{c}(z) = z^-{last}·He^{prefix}(z)");
    Ok(CheckReport::new(description, points, residuals, tolerance))
}

/// Residuals of `He^a(z)·He^b(z) = Σ_t coeff_t·He^t(z)` with the right side
/// from the stuffle product.
pub fn check_stuffle_identity(
    a: &Composition,
    b: &Composition,
    points: &[Complex],
    tolerance: f64,
) -> Result<CheckReport, LabError> {
    for c in [a, b] {
        if !c.is_convergent() {
            return Err(LabError::NotConvergent(c.clone()));
        }
    }
    let inner = check_tolerance(tolerance);
    let product = stuffle(a, b);
    let mut residuals = Vec::with_capacity(points.len());
    for z in points {
        let mut values: HashMap<&Composition, Complex> = HashMap::new();
        for t in [a, b].into_iter().chain(product.iter().map(|(t, _)| t)) {
            if !values.contains_key(t) {
                values.insert(t, he(t, z, inner)?.value);
            }
        }
        let lhs = &values[a] * &values[b];
        let mut rhs = Complex::zero(lhs.prec());
        for (t, q) in product.iter() {
            rhs = rhs + values[t].scale(&Real::from_rational(q, lhs.prec()));
        }
        residuals.push((&lhs - &rhs).abs_f64());
    }
    let description = format!("He^{a}(z)·He^{b}(z) = He^{{{product}}}(z)");
    Ok(CheckReport::new(description, points, residuals, tolerance))
}

/// Residual of `He^c(z)` against its normal form evaluated in the
/// generators of `table`.
pub fn end_to_end_check(
    c: &Composition,
    z: &Complex,
    tolerance: f64,
    table: &GeneratorTable,
) -> Result<CheckReport, LabError> {
    let inner = check_tolerance(tolerance);
    let normal = reduce_to_normal_form(c, table)?;
    let direct = he(c, z, inner)?;
    let via = eval_polynomial(&normal, z, inner, DEFAULT_PRECISION)?;
    let residual = (&direct.value - &via.value).abs_f64();
    let description = format!("He^{c}(z) = {normal}");
    Ok(CheckReport::new(
        description,
        std::slice::from_ref(z),
        vec![residual],
        tolerance,
    ))
}

/// Sample points `½, 1, 3/2, …` followed by `1+i, 2+i`.
pub fn default_points(count: usize) -> Vec<Complex> {
    let real = count.saturating_sub(2);
    let mut out: Vec<Complex> = (1..=real).map(|k| point(k as f64 / 2.0, 0.0)).collect();
    out.extend(
        [point(1.0, 1.0), point(2.0, 1.0)]
            .into_iter()
            .take(count - real),
    );
    out
}

/// Extra points used to confirm a candidate relation.
fn held_out_points() -> [Complex; 3] {
    [point(0.3, 0.7), point(2.7, -0.4), point(6.1, 1.3)]
}

/// A column function of the independence matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Hmzf(Composition),
    /// Pointwise product of several `He` values.
    Product(Vec<Composition>),
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Hmzf(c) => write!(f, "He^{c}"),
            Candidate::Product(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| format!("He^{c}")).collect();
                write!(f, "{}", parts.join("·"))
            }
        }
    }
}

impl Candidate {
    fn compositions(&self) -> &[Composition] {
        match self {
            Candidate::Hmzf(c) => std::slice::from_ref(c),
            Candidate::Product(cs) => cs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndependenceVerdict {
    NoRelationFound,
    RelationCandidate,
    /// Numerically rank deficient, but the relations fail at held-out
    /// points.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTerm {
    /// Index into the candidate list.
    pub candidate: usize,
    /// Power of `z` multiplying the candidate.
    pub power: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub terms: Vec<RelationTerm>,
    /// Largest relative residual at the held-out points.
    pub held_out_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub candidates: Vec<String>,
    pub degree_bound: u32,
    pub rows: usize,
    pub columns: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub numeric_rank: usize,
    pub verdict: IndependenceVerdict,
    pub relations: Vec<Relation>,
    pub points: Vec<SerialComplex>,
}

/// Evaluates candidates at points with per-composition caching.
struct ColumnEvaluator {
    tolerance: f64,
    cache: HashMap<(Composition, usize), EvalResult>,
}

impl ColumnEvaluator {
    fn candidate(
        &mut self,
        cand: &Candidate,
        z: &Complex,
        key: usize,
    ) -> Result<(Complex, f64), EvalError> {
        let bits = crate::mp::bits_for_digits(CERTIFICATE_PRECISION) + 16;
        let mut value = Complex::one(bits);
        let mut factors = Vec::new();
        for c in cand.compositions() {
            let k = (c.clone(), key);
            if !self.cache.contains_key(&k) {
                let req = EvalRequest::new(c.clone(), z.clone())
                    .with_tolerance(self.tolerance)
                    .with_precision(CERTIFICATE_PRECISION);
                self.cache.insert(k.clone(), eval_hmzf(&req)?);
            }
            let v = &self.cache[&k];
            value = &value * &v.value;
            factors.push((v.value.abs_f64(), v.error_bound, 1));
        }
        Ok((value, product_error(&factors)))
    }
}

/// Samples `z^j·f(z)` for every candidate `f` and `j ≤ degree_bound` and
/// reports the numeric rank of the resulting matrix.
///
/// Full rank means no relation with polynomial coefficients of degree
/// `≤ degree_bound` exists; it is evidence, not proof, of independence
/// over rational functions.
pub fn independence_certificate(
    candidates: &[Candidate],
    degree_bound: u32,
    points: &[Complex],
) -> Result<IndependenceCertificate, LabError> {
    if candidates.is_empty() {
        return Err(LabError::NoCandidates);
    }
    let powers = degree_bound as usize + 1;
    let columns = powers * candidates.len();
    let needed = columns + POINT_SLACK;
    if points.len() < needed {
        return Err(LabError::InsufficientPoints {
            needed,
            got: points.len(),
        });
    }
    let as_f64: Vec<(f64, f64)> = points.iter().map(Complex::to_f64).collect();
    for i in 0..points.len() {
        for j in 0..i {
            if (as_f64[i].0 - as_f64[j].0).hypot(as_f64[i].1 - as_f64[j].1) < 1e-12 {
                return Err(LabError::DuplicatePoints(j, i));
            }
        }
    }
    let bits = crate::mp::bits_for_digits(CERTIFICATE_PRECISION) + 16;
    let mut evaluator = ColumnEvaluator {
        tolerance: min_tolerance(CERTIFICATE_PRECISION),
        cache: HashMap::new(),
    };
    let row = |evaluator: &mut ColumnEvaluator,
               z: &Complex,
               key: usize|
     -> Result<Vec<(Complex, f64)>, EvalError> {
        let z = z.with_prec(bits);
        let mut out = Vec::with_capacity(columns);
        for cand in candidates {
            let (v, e) = evaluator.candidate(cand, &z, key)?;
            let mut zp = Complex::one(bits);
            for _ in 0..powers {
                let zabs = zp.abs_f64();
                out.push((&v * &zp, e * zabs));
                zp = &zp * &z;
            }
        }
        Ok(out)
    };

    let mut matrix: Vec<Vec<Complex>> = vec![Vec::with_capacity(points.len()); columns];
    let mut errors: Vec<Vec<f64>> = vec![Vec::with_capacity(points.len()); columns];
    for (i, z) in points.iter().enumerate() {
        for (j, (v, e)) in row(&mut evaluator, z, i)?.into_iter().enumerate() {
            matrix[j].push(v);
            errors[j].push(e);
        }
    }

    // normalize columns; track the largest normalized entry error
    let unit = 2f64.powi(-(bits as i32));
    let mut norms = Vec::with_capacity(columns);
    let mut entry_error: f64 = 0.0;
    for (col, errs) in matrix.iter_mut().zip(&errors) {
        let norm = col
            .iter()
            .fold(Real::zero(bits), |acc, v| acc + v.norm_sqr())
            .sqrt();
        let inv = Real::one(bits) / &norm;
        for v in col.iter_mut() {
            *v = v.scale(&inv);
        }
        let nf = norm.to_f64();
        for e in errs {
            entry_error = entry_error.max(e / nf);
        }
        norms.push(inv);
    }
    entry_error = entry_error.max(unit);
    let threshold = RANK_THRESHOLD_FACTOR * entry_error;

    let (sigma, v) = jacobi_svd(matrix, bits);
    let mut order: Vec<usize> = (0..columns).collect();
    order.sort_by(|&a, &b| sigma[b].cmp_value(&sigma[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| sigma[k].to_f64()).collect();
    let null: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| sigma[k].to_f64() <= threshold)
        .collect();
    let numeric_rank = columns - null.len();

    let mut relations = Vec::new();
    let mut verdict = IndependenceVerdict::NoRelationFound;
    if !null.is_empty() {
        // null vectors in the original (unnormalized) coordinates
        let basis: Vec<Vec<Complex>> = null
            .iter()
            .map(|&k| (0..columns).map(|j| v[j][k].scale(&norms[j])).collect())
            .collect();
        let reduced = row_reduce(basis);
        let held: Vec<Vec<(Complex, f64)>> = held_out_points()
            .iter()
            .enumerate()
            .map(|(i, z)| row(&mut evaluator, z, points.len() + i))
            .collect::<Result<_, _>>()?;
        let mut all_hold = true;
        for coeffs in reduced {
            let mut worst: f64 = 0.0;
            for h in &held {
                let mut acc = Complex::zero(bits);
                let mut scale = 0.0;
                for (x, (val, _)) in coeffs.iter().zip(h) {
                    acc = acc + x * val;
                    scale += x.abs_f64() * val.abs_f64();
                }
                worst = worst.max(acc.abs_f64() / scale.max(f64::MIN_POSITIVE));
            }
            all_hold &= worst <= threshold;
            let terms = coeffs
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(j, x)| {
                    let (re, im) = x.to_f64();
                    RelationTerm {
                        candidate: j / powers,
                        power: (j % powers) as u32,
                        re,
                        im,
                    }
                })
                .collect();
            relations.push(Relation {
                terms,
                held_out_residual: worst,
            });
        }
        verdict = if all_hold {
            IndependenceVerdict::RelationCandidate
        } else {
            IndependenceVerdict::Inconclusive
        };
    }

    Ok(IndependenceCertificate {
        candidates: candidates.iter().map(ToString::to_string).collect(),
        degree_bound,
        rows: points.len(),
        columns,
        singular_values,
        threshold,
        numeric_rank,
        verdict,
        relations,
        points: points.iter().map(serial_point).collect(),
    })
}

/// One-sided Jacobi SVD of the matrix given by its columns. Returns the
/// singular values (unsorted) and `V` as `v[row][col]`.
fn jacobi_svd(mut a: Vec<Vec<Complex>>, bits: u32) -> (Vec<Real>, Vec<Vec<Complex>>) {
    let n = a.len();
    let mut v: Vec<Vec<Complex>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Complex::one(bits)
                    } else {
                        Complex::zero(bits)
                    }
                })
                .collect()
        })
        .collect();
    let eps = Real::one(bits).ldexp(-(i64::from(bits) - 8));
    let dot = |x: &[Complex], y: &[Complex]| {
        x.iter()
            .zip(y)
            .fold(Complex::zero(bits), |acc, (p, q)| acc + p.conj() * q)
    };
    let norm = |x: &[Complex]| x.iter().fold(Real::zero(bits), |acc, p| acc + p.norm_sqr());
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm(&a[p]);
                let beta = norm(&a[q]);
                let gamma = dot(&a[p], &a[q]);
                let g = gamma.abs();
                if g.is_zero() || g <= &eps * &(&alpha * &beta).sqrt() {
                    continue;
                }
                rotated = true;
                // phase that makes a_pᴴ a_q real and positive
                let phase = gamma.conj().scale(&(Real::one(bits) / &g));
                let zeta = (&beta - &alpha) / g.mul_u64(2);
                let root = (Real::one(bits) + &zeta * &zeta).sqrt();
                let t = if zeta.is_negative() {
                    -(Real::one(bits) / (zeta.abs() + root))
                } else {
                    Real::one(bits) / (zeta + root)
                };
                let c = Real::one(bits) / (Real::one(bits) + &t * &t).sqrt();
                let s = &c * &t;
                rotate(&mut a, p, q, &phase, &c, &s);
                rotate(&mut v, p, q, &phase, &c, &s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = a.iter().map(|col| norm(col).sqrt()).collect();
    // transpose V to row-major
    let v_rows = (0..n)
        .map(|i| (0..n).map(|k| v[k][i].clone()).collect())
        .collect();
    (sigma, v_rows)
}

/// Applies `[a_p, a_q·phase] · [[c, s], [−s, c]]` to columns `p` and `q`.
fn rotate(cols: &mut [Vec<Complex>], p: usize, q: usize, phase: &Complex, c: &Real, s: &Real) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = &*y * phase;
        let new_x = x.scale(c) - yq.scale(s);
        let new_y = x.scale(s) + yq.scale(c);
        *x = new_x;
        *y = new_y;
    }
}

/// Reduced row echelon form of a set of null vectors, each normalized so
/// that its pivot coefficient is 1.
fn row_reduce(mut rows: Vec<Vec<Complex>>) -> Vec<Vec<Complex>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows.len() {
            break;
        }
        let scale: f64 = rows[rank..]
            .iter()
            .flat_map(|r| r.iter().map(Complex::abs_f64))
            .fold(0.0, f64::max);
        let Some(best) = (rank..rows.len())
            .max_by(|&x, &y| rows[x][col].abs_f64().total_cmp(&rows[y][col].abs_f64()))
        else {
            break;
        };
        if rows[best][col].abs_f64() <= 1e-12 * scale {
            continue;
        }
        rows.swap(rank, best);
        let inv = rows[rank][col].inv();
        for x in rows[rank].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x = &*x - &(&f * p);
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    // clear numerical dust
    for row in &mut rows {
        let scale = row.iter().map(Complex::abs_f64).fold(0.0, f64::max);
        for x in row.iter_mut() {
            if x.abs_f64() <= 1e-20 * scale {
                *x = Complex::zero(x.prec());
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::build_generator_table;

    fn c(parts: &[u32]) -> Composition {
        Composition::from_parts(parts)
    }

    #[test]
    fn difference_operator_examples() {
        let constant = |_: &Complex| Ok(Complex::from_f64(3.5, -1.0, 128));
        assert!(difference_operator(&constant, &point(2.0, 1.0))
            .unwrap()
            .is_zero());
        let identity = |z: &Complex| Ok(z.with_prec(128));
        assert_eq!(
            difference_operator(&identity, &point(5.0, 0.0))
                .unwrap()
                .to_f64(),
            (-1.0, 0.0)
        );
        let he2 = HmzfFunction::new(c(&[2]));
        let d = difference_operator(&he2, &point(1.0, 0.0)).unwrap();
        assert!((d.re.to_f64() - 1.0).abs() < 1e-12 && d.im.to_f64().abs() < 1e-12);
        assert!(matches!(
            difference_operator(&he2, &point(0.0, 0.0)),
            Err(LabError::Eval(EvalError::Pole { .. }))
        ));
    }

    #[test]
    fn j_kernel_examples() {
        assert_eq!(
            j_kernel(&c(&[3]), &point(2.0, 0.0)).unwrap().to_f64(),
            (0.125, 0.0)
        );
        assert!(j_kernel(&c(&[2, 1]), &point(2.0, 0.0)).unwrap().is_zero());
        assert_eq!(
            j_kernel(&c(&[2]), &point(0.0, 1.0)).unwrap().to_f64(),
            (-1.0, 0.0)
        );
        assert_eq!(
            j_kernel(&c(&[2]), &point(0.0, 0.0)),
            Err(LabError::ZeroArgument)
        );
    }

    #[test]
    fn difference_equation_examples() {
        let pts = [point(1.0, 0.0), point(0.5, 0.0), point(1.0, 1.0)];
        let r = check_difference_equation(&c(&[2]), &pts, 1e-10).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.residuals[0] < 1e-20);
        let r = check_difference_equation(&c(&[2, 1]), &[point(1.0, 0.0), point(2.0, 0.0)], 1e-9)
            .unwrap();
        assert!(r.passed());
        assert!(matches!(
            check_difference_equation(&c(&[2]), &[point(0.0, 0.0)], 1e-9),
            Err(LabError::Eval(EvalError::Pole { .. }))
        ));
        assert_eq!(
            check_difference_equation(&c(&[1, 2]), &pts, 1e-9),
            Err(LabError::NotConvergent(c(&[1, 2])))
        );
    }

    #[test]
    fn difference_equation_drops_the_last_part() {
        // Δ₋He^{2,3}(z) = z^-3·He^2(z), not z^-2·He^3(z)
        let z = point(2.0, 0.0);
        let lhs = difference_operator(&HmzfFunction::new(c(&[2, 3])), &z).unwrap();
        let zinv = z.with_prec(128).inv();
        let right = he(&c(&[2]), &z, 1e-12).unwrap().value * zinv.powu(3);
        let wrong = he(&c(&[3]), &z, 1e-12).unwrap().value * zinv.powu(2);
        assert!((&lhs - &right).abs_f64() < 1e-11);
        assert!((&lhs - &wrong).abs_f64() > 1e-3);
        assert!(check_difference_equation(&c(&[2, 3]), &[z], 1e-9)
            .unwrap()
            .passed());
    }

    #[test]
    fn stuffle_identity_examples() {
        let zero = [point(0.0, 0.0)];
        assert!(check_stuffle_identity(&c(&[2]), &c(&[2]), &zero, 1e-10)
            .unwrap()
            .passed());
        let unit = check_stuffle_identity(
            &c(&[2]),
            &Composition::empty(),
            &[point(0.5, 0.0), point(1.0, 1.0)],
            1e-10,
        )
        .unwrap();
        assert!(unit.residuals.iter().all(|&r| r == 0.0));
        assert!(
            check_stuffle_identity(&c(&[2]), &c(&[3]), &[point(0.5, 0.0)], 1e-10)
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn end_to_end_examples() {
        let table = build_generator_table(4).unwrap();
        assert!(
            end_to_end_check(&c(&[2, 2]), &point(0.0, 0.0), 1e-10, &table)
                .unwrap()
                .passed()
        );
        let r = end_to_end_check(&c(&[4]), &point(1.0, 0.0), 1e-10, &table).unwrap();
        assert_eq!(r.residuals, vec![0.0]);
        assert!(
            end_to_end_check(&c(&[2, 1, 1]), &point(0.5, 0.0), 1e-9, &table)
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn default_point_layout() {
        let pts = default_points(5);
        let f: Vec<(f64, f64)> = pts.iter().map(Complex::to_f64).collect();
        assert_eq!(
            f,
            vec![(0.5, 0.0), (1.0, 0.0), (1.5, 0.0), (1.0, 1.0), (2.0, 1.0)]
        );
    }

    #[test]
    fn independence_of_the_worked_triple() {
        let cands = [
            Candidate::Hmzf(Composition::empty()),
            Candidate::Hmzf(c(&[2])),
            Candidate::Hmzf(c(&[2, 1])),
        ];
        let cert = independence_certificate(&cands, 2, &default_points(20)).unwrap();
        assert_eq!(cert.verdict, IndependenceVerdict::NoRelationFound);
        assert_eq!(cert.numeric_rank, 9);
        assert!(cert.singular_values[8] > 1e3 * cert.threshold);
    }

    #[test]
    fn duplicate_candidates_give_a_relation() {
        let cands = [Candidate::Hmzf(c(&[2])), Candidate::Hmzf(c(&[2]))];
        let cert = independence_certificate(&cands, 0, &default_points(10)).unwrap();
        assert_eq!(cert.verdict, IndependenceVerdict::RelationCandidate);
        assert_eq!(cert.numeric_rank, 1);
        let terms = &cert.relations[0].terms;
        assert_eq!(terms.len(), 2);
        assert!((terms[0].re - 1.0).abs() < 1e-12 && (terms[1].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn planted_stuffle_relation_is_recovered() {
        let cands = [
            Candidate::Hmzf(c(&[2, 2])),
            Candidate::Hmzf(c(&[4])),
            Candidate::Product(vec![c(&[2]), c(&[2])]),
        ];
        let cert = independence_certificate(&cands, 0, &default_points(11)).unwrap();
        assert_eq!(cert.verdict, IndependenceVerdict::RelationCandidate);
        let terms = &cert.relations[0].terms;
        let expected = [1.0, 0.5, -0.5];
        for (t, e) in terms.iter().zip(expected) {
            assert!((t.re - e).abs() < 1e-6 && t.im.abs() < 1e-6, "{terms:?}");
        }
        assert!(cert.relations[0].held_out_residual <= cert.threshold);
    }

    #[test]
    fn certificate_input_errors() {
        let cands = [Candidate::Hmzf(c(&[2]))];
        assert_eq!(
            independence_certificate(&cands, 1, &default_points(5)),
            Err(LabError::InsufficientPoints { needed: 10, got: 5 })
        );
        let mut pts = default_points(9);
        pts.push(point(0.5, 0.0));
        assert_eq!(
            independence_certificate(&cands, 0, &pts),
            Err(LabError::DuplicatePoints(0, 9))
        );
        assert_eq!(
            independence_certificate(&[], 0, &pts),
            Err(LabError::NoCandidates)
        );
    }

    #[test]
    fn report_serializes() {
        let r = check_difference_equation(&c(&[2]), &[point(1.0, 0.0)], 1e-10).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(json.contains("\"verdict\":\"pass\""));
    }
}
