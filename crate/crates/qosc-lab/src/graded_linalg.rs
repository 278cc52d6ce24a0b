//! Z2-graded sparse linear algebra.
//!
//! Every operator lives on an ordered tensor product of graded spaces. The
//! basis of a product is row-major over the factor list (the first factor is
//! the most significant digit), and the Koszul sign rule
//! `(A⊗B)(C⊗D) = (-1)^{p(B)p(C)} AC⊗BD` is realised entry by entry in
//! [`graded_kron`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("a parity profile needs M+N >= 1")]
    EmptyProfile,
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operator is not parity-homogeneous")]
    NonHomogeneous,
    #[error("shape mismatch: dimension {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("operator does not act on the space of factor {position}")]
    SpaceMismatch { position: usize },
    #[error(
        "invalid tolerance: need 0 < drop_tol < abs_tol < 1 (got drop {drop_tol}, abs {abs_tol})"
    )]
    InvalidTolerance { abs_tol: f64, drop_tol: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// The grading `p(i) = 0` for `i <= M`, `p(i) = 1` for `i > M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ParityProfile {
    pub m: usize,
    pub n: usize,
}

impl ParityProfile {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m + n == 0 {
            return Err(LinalgError::EmptyProfile);
        }
        Ok(Self { m, n })
    }

    /// Number of fundamental basis vectors, `M+N`.
    pub fn rank(&self) -> usize {
        self.m + self.n
    }

    /// `p(i)` for a 1-based index. Indices are read cyclically, so `p(0) = p(M+N)`.
    pub fn parity(&self, i: usize) -> u8 {
        u8::from(self.cyclic(i) > self.m)
    }

    /// `(-1)^{p(i)}`.
    pub fn sign(&self, i: usize) -> i32 {
        if self.parity(i) == 0 {
            1
        } else {
            -1
        }
    }

    /// Maps any integer index onto `1..=M+N` modulo `M+N`.
    pub fn cyclic(&self, i: usize) -> usize {
        let r = self.rank();
        (i + r - 1) % r + 1
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.rank()
    }

    pub fn is_super(&self) -> bool {
        self.m > 0 && self.n > 0
    }

    pub fn fundamental(&self) -> GradedSpace {
        GradedSpace::new(self.indices().map(|i| self.parity(i)).collect())
    }
}

impl fmt::Display for ParityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// A finite-dimensional space with a parity attached to each basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSpace {
    parity: Arc<[u8]>,
}

impl GradedSpace {
    pub fn new(parity: Vec<u8>) -> Self {
        assert!(!parity.is_empty(), "graded space must be non-empty");
        assert!(parity.iter().all(|&p| p < 2), "parities are 0 or 1");
        Self {
            parity: parity.into(),
        }
    }

    pub fn even(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    /// Parity of the 0-based basis vector `idx`.
    pub fn parity(&self, idx: usize) -> u8 {
        self.parity[idx]
    }

    pub fn parities(&self) -> &[u8] {
        &self.parity
    }
}

/// Numerical tolerances shared by the checkers.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub drop_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            drop_tol: 1e-14,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, drop_tol: f64) -> Result<Self> {
        if !(0.0 < drop_tol && drop_tol < abs_tol && abs_tol < 1.0) {
            return Err(LinalgError::InvalidTolerance { abs_tol, drop_tol });
        }
        Ok(Self { abs_tol, drop_tol })
    }
}

fn flat_parity(factors: &[GradedSpace]) -> Arc<[u8]> {
    let mut out = vec![0u8];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.dim());
        for &a in &out {
            for &b in f.parities() {
                next.push((a + b) % 2);
            }
        }
        out = next;
    }
    out.into()
}

/// A square sparse complex operator on an ordered product of graded spaces,
/// stored in compressed-row form with sorted column indices.
#[derive(Clone)]
pub struct SparseOperator {
    factors: Arc<[GradedSpace]>,
    basis_parity: Arc<[u8]>,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
    parity: Option<u8>,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseOperator")
            .field("dim", &self.dim())
            .field("factors", &self.factors.len())
            .field("nnz", &self.nnz())
            .field("parity", &self.parity)
            .finish()
    }
}

impl SparseOperator {
    fn assemble(
        factors: Arc<[GradedSpace]>,
        basis_parity: Arc<[u8]>,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Self {
        let mut op = Self {
            factors,
            basis_parity,
            indptr,
            indices,
            values,
            parity: None,
        };
        op.parity = op.detect_parity();
        op
    }

    fn detect_parity(&self) -> Option<u8> {
        let mut found: Option<u8> = None;
        for (r, c, _) in self.iter() {
            let p = (self.basis_parity[r] + self.basis_parity[c]) % 2;
            match found {
                None => found = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(found.unwrap_or(0))
    }

    /// Builds an operator from (row, column, value) triplets; duplicates are summed
    /// and exact zeros dropped.
    pub fn from_triplets(
        factors: &[GradedSpace],
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let basis_parity = flat_parity(factors);
        let dim = basis_parity.len();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            assert!(
                r < dim && c < dim,
                "triplet ({r},{c}) outside dimension {dim}"
            );
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = C64::new(0.0, 0.0);
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self::assemble(factors.into(), basis_parity, indptr, indices, values)
    }

    pub fn zeros(factors: &[GradedSpace]) -> Self {
        Self::from_triplets(factors, std::iter::empty())
    }

    pub fn identity(factors: &[GradedSpace]) -> Self {
        Self::diagonal(
            factors,
            &vec![C64::new(1.0, 0.0); flat_parity(factors).len()],
        )
    }

    pub fn diagonal(factors: &[GradedSpace], diag: &[C64]) -> Self {
        Self::from_triplets(factors, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn from_dense(factors: &[GradedSpace], rows: &[Vec<C64>]) -> Self {
        Self::from_triplets(
            factors,
            rows.iter()
                .enumerate()
                .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v))),
        )
    }

    pub fn dim(&self) -> usize {
        self.basis_parity.len()
    }

    pub fn factors(&self) -> &[GradedSpace] {
        &self.factors
    }

    pub fn basis_parity(&self) -> &[u8] {
        &self.basis_parity
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Homogeneous degree, `None` if entries of both parities are present.
    /// The zero operator reports parity 0.
    pub fn parity(&self) -> Option<u8> {
        self.parity
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.values[self.indptr[r] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut out = vec![vec![C64::new(0.0, 0.0); self.dim()]; self.dim()];
        for (r, c, v) in self.iter() {
            out[r][c] = v;
        }
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(LinalgError::ShapeMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zeros(&self.factors);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ c_k A_k` over operators of equal dimension.
    pub fn linear_combination(terms: &[(C64, &SparseOperator)]) -> Result<Self> {
        let first = terms.first().expect("at least one term").1;
        for (_, t) in terms {
            first.same_shape(t)?;
        }
        Ok(Self::from_triplets(
            &first.factors,
            terms
                .iter()
                .flat_map(|(c, t)| t.iter().map(move |(r, col, v)| (r, col, *c * v))),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), other)])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let dim = self.dim();
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut mark = vec![usize::MAX; dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..dim {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self::assemble(
            self.factors.clone(),
            self.basis_parity.clone(),
            indptr,
            indices,
            values,
        ))
    }

    /// Drops entries with modulus at most `rel_tol · max_abs()`.
    pub fn prune(&self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.max_abs();
        Self::from_triplets(
            &self.factors,
            self.iter().filter(|(_, _, v)| v.norm() > cut),
        )
    }

    /// Right multiplication by the coordinate projector onto columns with `keep[c]`.
    pub fn restrict_columns(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.dim());
        Self::from_triplets(&self.factors, self.iter().filter(|(_, c, _)| keep[*c]))
    }

    /// Applies the operator to a vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim());
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, a)| a * v[c]).sum())
            .collect()
    }

    /// Full supertrace `Σ_s (-1)^{p(s)} A(s,s)`; the operator is square by construction.
    pub fn supertrace(&self) -> C64 {
        (0..self.dim())
            .map(|s| {
                let d = self.get(s, s);
                if self.basis_parity[s] == 1 {
                    -d
                } else {
                    d
                }
            })
            .sum()
    }

    /// Supertrace over the first `k` tensor factors; the result acts on the
    /// remaining factors.
    pub fn partial_supertrace(&self, k: usize) -> Self {
        assert!(k <= self.factors.len());
        let traced: Vec<GradedSpace> = self.factors[..k].to_vec();
        let rest: Vec<GradedSpace> = self.factors[k..].to_vec();
        let tp = flat_parity(&traced);
        let rp = flat_parity(&rest);
        let dr = rp.len();
        let mut trip = Vec::new();
        for (s, &ps) in tp.iter().enumerate() {
            for r in 0..dr {
                let row = s * dr + r;
                for (col, v) in self.row(row) {
                    if col / dr != s {
                        continue;
                    }
                    let c = col % dr;
                    let odd = ps * ((1 + rp[r] + rp[c]) % 2) == 1;
                    trip.push((r, c, if odd { -v } else { v }));
                }
            }
        }
        Self::from_triplets(&rest, trip)
    }
}

/// The matrix unit `E_ij` (1-based indices) on a graded space.
pub fn matrix_unit(space: &GradedSpace, i: usize, j: usize) -> Result<SparseOperator> {
    for idx in [i, j] {
        if idx == 0 || idx > space.dim() {
            return Err(LinalgError::IndexOutOfRange {
                index: idx,
                dim: space.dim(),
            });
        }
    }
    Ok(SparseOperator::from_triplets(
        std::slice::from_ref(space),
        [(i - 1, j - 1, C64::new(1.0, 0.0))],
    ))
}

fn kron_entries(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    let factors: Vec<GradedSpace> = a.factors.iter().chain(b.factors.iter()).cloned().collect();
    let db = b.dim();
    let pa = &a.basis_parity;
    let pb = &b.basis_parity;
    let mut trip = Vec::with_capacity(a.nnz() * b.nnz());
    for ra in 0..a.dim() {
        for rb in 0..db {
            for (ca, va) in a.row(ra) {
                for (cb, vb) in b.row(rb) {
                    let odd = ((pb[rb] + pb[cb]) % 2) * pa[ca] == 1;
                    let v = va * vb;
                    trip.push((ra * db + rb, ca * db + cb, if odd { -v } else { v }));
                }
            }
        }
    }
    SparseOperator::from_triplets(&factors, trip)
}

/// Graded tensor product of homogeneous operators:
/// `(A⊗B)[(rA,rB),(cA,cB)] = A[rA,cA] B[rB,cB] (-1)^{p(B) p(cA)}`.
pub fn graded_kron(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    if a.parity().is_none() || b.parity().is_none() {
        return Err(LinalgError::NonHomogeneous);
    }
    Ok(kron_entries(a, b))
}

/// Embeds `a`, acting on the consecutive factors `factors[start..start+a.factors().len()]`,
/// into the full product as `1⊗…⊗a⊗…⊗1`.
pub fn embed_block(
    a: &SparseOperator,
    start: usize,
    factors: &[GradedSpace],
) -> Result<SparseOperator> {
    let width = a.factors().len();
    if start + width > factors.len() {
        return Err(LinalgError::SpaceMismatch { position: start });
    }
    for (k, f) in a.factors().iter().enumerate() {
        if f != &factors[start + k] {
            return Err(LinalgError::SpaceMismatch {
                position: start + k,
            });
        }
    }
    if a.parity().is_none() {
        return Err(LinalgError::NonHomogeneous);
    }
    let mut out = a.clone();
    if start > 0 {
        out = kron_entries(&SparseOperator::identity(&factors[..start]), &out);
    }
    if start + width < factors.len() {
        out = kron_entries(&out, &SparseOperator::identity(&factors[start + width..]));
    }
    Ok(out)
}

/// Embeds an operator on the single factor `position` (0-based).
pub fn embed_factor(
    a: &SparseOperator,
    position: usize,
    factors: &[GradedSpace],
) -> Result<SparseOperator> {
    if a.factors().len() != 1 {
        return Err(LinalgError::SpaceMismatch { position });
    }
    embed_block(a, position, factors)
}

/// Max-absolute-entry norm of `A − B`.
pub fn residual(a: &SparseOperator, b: &SparseOperator) -> Result<f64> {
    Ok(a.sub(b)?.max_abs())
}

/// Generalised commutator `[X,Y]_c = XY − (−1)^{p_X p_Y} c YX` with explicit parities.
pub fn graded_commutator(
    x: &SparseOperator,
    px: u8,
    y: &SparseOperator,
    py: u8,
    c: C64,
) -> Result<SparseOperator> {
    let sign = if px * py % 2 == 1 { -1.0 } else { 1.0 };
    SparseOperator::linear_combination(&[(C64::new(1.0, 0.0), &x.mul(y)?), (-c * sign, &y.mul(x)?)])
}

/// Residual of `lhs = rhs` relative to the magnitude of the terms involved:
/// `max|(lhs − rhs)P| / max(1, max|tP|)` over `t ∈ {lhs, rhs} ∪ terms`, where `P`
/// is the optional column projector.
pub fn relative_residual(
    lhs: &SparseOperator,
    rhs: &SparseOperator,
    terms: &[&SparseOperator],
    keep: Option<&[bool]>,
) -> Result<f64> {
    let proj = |op: &SparseOperator| match keep {
        Some(k) => op.restrict_columns(k).max_abs(),
        None => op.max_abs(),
    };
    let diff = proj(&lhs.sub(rhs)?);
    let scale = terms
        .iter()
        .map(|t| proj(t))
        .chain([proj(lhs), proj(rhs)])
        .fold(1.0_f64, f64::max);
    Ok(diff / scale)
}

/// One checked identity: its name, relative residual and whether it must vanish exactly.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RelationRecord {
    pub name: String,
    pub residual: f64,
    pub exact: bool,
}

/// A list of checked identities produced by one checker call.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct RelationReport {
    pub records: Vec<RelationRecord>,
}

impl RelationReport {
    pub fn push(&mut self, name: impl Into<String>, residual: f64) {
        self.records.push(RelationRecord {
            name: name.into(),
            residual,
            exact: false,
        });
    }

    /// Records an identity that must hold with residual exactly zero.
    pub fn push_exact(&mut self, name: impl Into<String>, residual: f64) {
        self.records.push(RelationRecord {
            name: name.into(),
            residual,
            exact: true,
        });
    }

    pub fn extend(&mut self, other: RelationReport) {
        self.records.extend(other.records);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.residual)
    }

    /// Records violating `tol` (or non-zero exact records).
    pub fn failures(&self, tol: f64) -> Vec<&RelationRecord> {
        self.records
            .iter()
            .filter(|r| {
                if r.exact {
                    r.residual != 0.0
                } else {
                    r.residual.is_nan() || r.residual >= tol
                }
            })
            .collect()
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.failures(tol).is_empty()
    }
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}
