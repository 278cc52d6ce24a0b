//! Oscillator L-operators of the contracted algebras `U_q(gl(M|N;I))` and
//! the checkers for the relations they must satisfy.
//!
//! Entries are stored as operators on the Fock space; the diagonal entries
//! are additionally kept as exact `coeff·q^{exponent}` diagonals so that
//! inverses and Cartan exponents never involve logarithms.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fock::{build_vacuum, FockError, FockSpace, GeneratorSet, IndexSet, IndexSetShape};
use crate::graded_linalg::{
    graded_commutator, graded_kron, matrix_unit, real, relative_residual, GradedSpace, LinalgError,
    ParityProfile, RelationReport, SparseOperator, C64,
};
use crate::rmatrix::{
    build_constant_r, build_ps_rmatrix, cartan, check_q, chevalley_parity, evaluation_images,
    Graded, RMatrixError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LOperatorError {
    #[error(
        "index set {0}: no explicit oscillator solution is provided for intermediate index sets"
    )]
    Unsupported(String),
    #[error("the Fock space was built for index set {space}, not {requested}")]
    SpaceMismatch { space: String, requested: String },
    #[error("spectral parameter must be non-zero")]
    ZeroSpectralParameter,
    #[error("diagonal twist must have {expected} non-zero entries")]
    BadTwist { expected: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
}

pub type Result<T> = std::result::Result<T, LOperatorError>;

/// A diagonal operator `coeff · q^{exps}` (exponents per Fock basis state).
#[derive(Debug, Clone, PartialEq)]
pub struct QPowDiag {
    pub coeff: C64,
    pub exps: Vec<i64>,
}

impl QPowDiag {
    pub fn one(dim: usize) -> Self {
        Self {
            coeff: real(1.0),
            exps: vec![0; dim],
        }
    }

    pub fn from_exps(exps: Vec<i64>) -> Self {
        Self {
            coeff: real(1.0),
            exps,
        }
    }

    pub fn values(&self, q: C64) -> Vec<C64> {
        self.exps
            .iter()
            .map(|&e| self.coeff * q.powi(e as i32))
            .collect()
    }

    pub fn to_operator(&self, q: C64, factors: &[GradedSpace]) -> SparseOperator {
        SparseOperator::diagonal(factors, &self.values(q))
    }

    pub fn inverse(&self) -> Self {
        Self {
            coeff: self.coeff.inv(),
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            coeff: self.coeff * other.coeff,
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            coeff: self.coeff * c,
            exps: self.exps.clone(),
        }
    }
}

/// The pair `(L, L̄)` of a contracted algebra on a Fock space.
#[derive(Debug, Clone)]
pub struct LOperatorPair {
    index_set: IndexSet,
    gens: GeneratorSet,
    case: IndexSetShape,
    l: Vec<SparseOperator>,
    lbar: Vec<SparseOperator>,
    diag: Vec<QPowDiag>,
    diag_bar: Vec<Option<QPowDiag>>,
}

/// `L_I(x) = L − L̄ x⁻¹` assembled on Fock ⊗ fundamental.
#[derive(Debug, Clone)]
pub struct EvaluatedL {
    pub x: C64,
    pub matrix: SparseOperator,
}

pub fn build_l_pair(index_set: &IndexSet, space: &FockSpace, q: C64) -> Result<LOperatorPair> {
    if space.index_set() != index_set {
        return Err(LOperatorError::SpaceMismatch {
            space: space.index_set().to_string(),
            requested: index_set.to_string(),
        });
    }
    check_q(q)?;
    LOperatorPair::from_generators(&GeneratorSet::new(space, q)?)
}

fn chain(coeff: C64, ops: &[&SparseOperator]) -> Result<SparseOperator> {
    let mut out = ops[0].clone();
    for op in &ops[1..] {
        out = out.mul(op)?;
    }
    Ok(out.scale(coeff))
}

fn sgn(e: i64) -> f64 {
    if e.rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    }
}

impl LOperatorPair {
    /// Builds the pair from an arbitrary generator set, e.g. one transformed by
    /// an oscillator automorphism.
    pub fn from_generators(gens: &GeneratorSet) -> Result<Self> {
        let space = gens.space();
        let index_set = space.index_set().clone();
        let p = index_set.profile();
        let n = p.rank();
        let q = gens.q();
        let qq = q - q.inv();
        let dim = space.dim();
        let factors = space.factors();
        let zero = SparseOperator::zeros(&factors);
        let s = |k: usize| p.sign(k) as i64;
        let par = |k: usize| p.parity(k) as i64;
        let idx = |a: usize, b: usize| (a - 1) * n + (b - 1);
        let mut l = vec![zero.clone(); n * n];
        let mut lbar = vec![zero; n * n];
        let mut diag = vec![QPowDiag::one(dim); n];
        let mut diag_bar: Vec<Option<QPowDiag>> = vec![None; n];
        let qexp = |modes: &[usize], coef: i64| {
            gens.exponent(&modes.iter().map(|&m| (m, coef)).collect::<Vec<_>>())
        };
        let qop = |modes: &[usize], coef: i64| gens.qpow_exponent(&qexp(modes, coef));
        let case = index_set.shape();
        match case {
            IndexSetShape::Empty => {}
            IndexSetShape::Full => {
                diag_bar = vec![Some(QPowDiag::one(dim)); n];
            }
            IndexSetShape::Single(i) => {
                let mode = |a: usize| space.mode_index(i, a);
                let nstr = |ranges: &[(usize, usize)]| -> Result<Vec<usize>> {
                    let mut v = Vec::new();
                    for &(lo, hi) in ranges {
                        for c in lo..=hi {
                            if c != i {
                                v.push(mode(c)?);
                            }
                        }
                    }
                    Ok(v)
                };
                let c = |a: usize| -> Result<&SparseOperator> { Ok(gens.c(mode(a)?)) };
                let cd = |b: usize| -> Result<&SparseOperator> { Ok(gens.cdag(mode(b)?)) };
                let si = s(i);
                diag[i - 1] = QPowDiag::from_exps(qexp(&nstr(&[(1, n)])?, -si));
                for a in index_set.complement() {
                    diag[a - 1] = QPowDiag::from_exps(qexp(&[mode(a)?], s(a)));
                }
                for a in i + 1..=n {
                    let d = qop(&nstr(&[(i + 1, a - 1)])?, si);
                    l[idx(a, i)] = chain(real(s(a) as f64), &[c(a)?, &d])?;
                }
                for b in 1..i {
                    let d = qop(&nstr(&[(b, i - 1)])?, si);
                    l[idx(i, b)] = chain(qq, &[cd(b)?, &d])?;
                }
                let sg = |a: usize, b: usize| sgn((par(a) + par(b)) * (par(a) + par(i)) + par(i));
                for a in 1..=n {
                    for b in 1..a {
                        if a < i || b > i {
                            let d = qop(&nstr(&[(b, a - 1)])?, si);
                            l[idx(a, b)] = chain(qq * sg(a, b), &[c(a)?, cd(b)?, &d])?;
                        }
                    }
                }
                diag_bar[i - 1] = Some(QPowDiag::from_exps(qexp(&nstr(&[(1, n)])?, si)));
                for a in 1..i {
                    let d = qop(&nstr(&[(1, a - 1), (i + 1, n)])?, si);
                    lbar[idx(a, i)] = chain(real(s(a) as f64), &[c(a)?, &d])?;
                }
                for b in i + 1..=n {
                    let d = qop(&nstr(&[(1, i - 1), (b, n)])?, si);
                    lbar[idx(i, b)] = chain(qq, &[cd(b)?, &d])?;
                }
                for a in 1..i {
                    for b in i + 1..=n {
                        let d = qop(&nstr(&[(1, a - 1), (b, n)])?, si);
                        lbar[idx(a, b)] = chain(qq * sg(a, b), &[c(a)?, cd(b)?, &d])?;
                    }
                }
            }
            IndexSetShape::CoSingle(a) => {
                let mode = |k: usize| space.mode_index(k, a);
                let nstr = |ranges: &[(usize, usize)]| -> Result<Vec<usize>> {
                    let mut v = Vec::new();
                    for &(lo, hi) in ranges {
                        for k in lo..=hi {
                            if k != a {
                                v.push(mode(k)?);
                            }
                        }
                    }
                    Ok(v)
                };
                // c_{aj} lowers mode (j,a); c†_{ia} raises mode (i,a)
                let c = |j: usize| -> Result<&SparseOperator> { Ok(gens.c(mode(j)?)) };
                let cd = |i: usize| -> Result<&SparseOperator> { Ok(gens.cdag(mode(i)?)) };
                let sa = s(a);
                let qsa = q.powi(-sa as i32);
                diag[a - 1] = QPowDiag::from_exps(qexp(&nstr(&[(1, n)])?, sa));
                for &i in index_set.members() {
                    diag[i - 1] = QPowDiag::from_exps(qexp(&[mode(i)?], -s(i)));
                    diag_bar[i - 1] = Some(QPowDiag::from_exps(qexp(&[mode(i)?], s(i))));
                }
                for i in a + 1..=n {
                    let d = qop(&nstr(&[(1, a - 1), (i + 1, n)])?, sa);
                    l[idx(i, a)] = chain(qq * sa as f64, &[cd(i)?, &d])?;
                }
                for j in 1..a {
                    let d = qop(&nstr(&[(1, j), (a + 1, n)])?, sa);
                    l[idx(a, j)] = chain(qsa, &[c(j)?, &d])?;
                }
                let e = |i: usize, j: usize| (par(i) + par(j)) * par(a) + par(i) * par(j);
                for i in 1..=n {
                    for j in 1..i {
                        if i == a || j == a {
                            continue;
                        }
                        l[idx(i, j)] = if j < a && a < i {
                            let d = qop(&nstr(&[(1, j), (i + 1, n)])?, sa);
                            chain(qsa * qq * sgn(e(i, j)), &[cd(i)?, c(j)?, &d])?
                        } else {
                            let d = qop(&nstr(&[(j + 1, i)])?, -sa);
                            chain(qq * sgn(e(i, j) + 1), &[cd(i)?, c(j)?, &d])?
                        };
                    }
                }
                for i in 1..a {
                    let d = qop(&nstr(&[(i + 1, a - 1)])?, sa);
                    lbar[idx(i, a)] = chain(qq * sa as f64, &[cd(i)?, &d])?;
                }
                for j in a + 1..=n {
                    let d = qop(&nstr(&[(a + 1, j)])?, sa);
                    lbar[idx(a, j)] = chain(qsa, &[c(j)?, &d])?;
                }
                for i in 1..=n {
                    for j in i + 1..=n {
                        if i == a || j == a {
                            continue;
                        }
                        lbar[idx(i, j)] = if i < a && a < j {
                            let d = qop(&nstr(&[(1, i), (j + 1, n)])?, -sa);
                            chain(qq * sgn(e(i, j) + 1), &[cd(i)?, c(j)?, &d])?
                        } else {
                            let d = qop(&nstr(&[(i + 1, j)])?, sa);
                            chain(qsa * qq * sgn(e(i, j)), &[cd(i)?, c(j)?, &d])?
                        };
                    }
                }
            }
            IndexSetShape::Intermediate => {
                return Err(LOperatorError::Unsupported(index_set.to_string()));
            }
        }
        for k in 0..n {
            l[k * n + k] = diag[k].to_operator(q, &factors);
            if let Some(d) = &diag_bar[k] {
                lbar[k * n + k] = d.to_operator(q, &factors);
            }
        }
        Ok(Self {
            index_set,
            gens: gens.clone(),
            case,
            l,
            lbar,
            diag,
            diag_bar,
        })
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn profile(&self) -> ParityProfile {
        self.index_set.profile()
    }

    pub fn space(&self) -> &FockSpace {
        self.gens.space()
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn q(&self) -> C64 {
        self.gens.q()
    }

    pub fn case(&self) -> IndexSetShape {
        self.case
    }

    fn rank(&self) -> usize {
        self.profile().rank()
    }

    /// `L_ab` (1-based).
    pub fn l(&self, a: usize, b: usize) -> &SparseOperator {
        &self.l[(a - 1) * self.rank() + b - 1]
    }

    /// `L̄_ab` (1-based).
    pub fn lbar(&self, a: usize, b: usize) -> &SparseOperator {
        &self.lbar[(a - 1) * self.rank() + b - 1]
    }

    /// `L_ii` as an exact diagonal.
    pub fn diag(&self, i: usize) -> &QPowDiag {
        &self.diag[i - 1]
    }

    /// `L̄_ii` as an exact diagonal, `None` where it vanishes.
    pub fn diag_bar(&self, i: usize) -> Option<&QPowDiag> {
        self.diag_bar[i - 1].as_ref()
    }

    /// Parity `p(a)+p(b)` of the entry `(a,b)`.
    pub fn entry_parity(&self, a: usize, b: usize) -> u8 {
        let p = self.profile();
        (p.parity(a) + p.parity(b)) % 2
    }

    /// `L_ab − L̄_ab x⁻¹`.
    pub fn entry(&self, a: usize, b: usize, x: C64) -> Result<SparseOperator> {
        if x == real(0.0) {
            return Err(LOperatorError::ZeroSpectralParameter);
        }
        Ok(SparseOperator::linear_combination(&[
            (real(1.0), self.l(a, b)),
            (-x.inv(), self.lbar(a, b)),
        ])?)
    }

    fn fundamental(&self) -> GradedSpace {
        self.profile().fundamental()
    }

    fn fock_identity(&self) -> SparseOperator {
        SparseOperator::identity(&self.space().factors())
    }

    /// `Σ_ab T_ab ⊗ E_ab` on Fock ⊗ fundamental.
    fn aux_sum(
        &self,
        entry: impl Fn(usize, usize) -> Result<SparseOperator>,
    ) -> Result<SparseOperator> {
        let v = self.fundamental();
        let mut f = self.space().factors();
        f.push(v.clone());
        let mut out = SparseOperator::zeros(&f);
        for a in 1..=self.rank() {
            for b in 1..=self.rank() {
                let t = entry(a, b)?;
                if !t.is_zero() {
                    out = out.add(&graded_kron(&t, &matrix_unit(&v, a, b)?)?)?;
                }
            }
        }
        Ok(out)
    }

    /// `Σ_ab T_ab ⊗ 1 ⊗ E_ab` on Fock ⊗ fundamental ⊗ fundamental.
    fn aux_sum_13(
        &self,
        entry: impl Fn(usize, usize) -> Result<SparseOperator>,
    ) -> Result<SparseOperator> {
        let v = self.fundamental();
        let id = SparseOperator::identity(std::slice::from_ref(&v));
        let mut f = self.space().factors();
        f.extend([v.clone(), v.clone()]);
        let mut out = SparseOperator::zeros(&f);
        for a in 1..=self.rank() {
            for b in 1..=self.rank() {
                let t = entry(a, b)?;
                if !t.is_zero() {
                    let unit = graded_kron(&id, &matrix_unit(&v, a, b)?)?;
                    out = out.add(&graded_kron(&t, &unit)?)?;
                }
            }
        }
        Ok(out)
    }

    /// Fock interior mask repeated over `aux` auxiliary basis states.
    fn keep(&self, d: usize, aux: usize) -> Vec<bool> {
        self.space()
            .interior_mask(d)
            .into_iter()
            .flat_map(|k| std::iter::repeat_n(k, aux))
            .collect()
    }
}

pub fn evaluate_l(pair: &LOperatorPair, x: C64) -> Result<EvaluatedL> {
    let matrix = pair.aux_sum(|a, b| pair.entry(a, b, x))?;
    Ok(EvaluatedL { x, matrix })
}

/// `R²³(x,y) L¹³(y) L¹²(x) = L¹²(x) L¹³(y) R²³(x,y)` on the interior (`d = 2`).
pub fn check_rll_affine(pair: &LOperatorPair, x: C64, y: C64) -> Result<f64> {
    if x == real(0.0) || y == real(0.0) {
        return Err(LOperatorError::ZeroSpectralParameter);
    }
    let p = pair.profile();
    let r = build_ps_rmatrix(p, pair.q(), x, y)?.matrix;
    rll_residual(
        pair,
        &r,
        |a, b| pair.entry(a, b, y),
        |a, b| pair.entry(a, b, x),
    )
}

/// `R²³ T¹³ S¹² = S¹² T¹³ R²³` with `T` in the third and `S` in the second factor.
fn rll_residual(
    pair: &LOperatorPair,
    r: &SparseOperator,
    t13: impl Fn(usize, usize) -> Result<SparseOperator>,
    s12: impl Fn(usize, usize) -> Result<SparseOperator>,
) -> Result<f64> {
    let v = pair.fundamental();
    let n = v.dim();
    let l12 = graded_kron(&pair.aux_sum(s12)?, &SparseOperator::identity(&[v]))?;
    let l13 = pair.aux_sum_13(t13)?;
    let r23 = graded_kron(&pair.fock_identity(), r)?;
    let lhs = r23.mul(&l13)?.mul(&l12)?;
    let rhs = l12.mul(&l13)?.mul(&r23)?;
    let keep = pair.keep(2, n * n);
    Ok(relative_residual(&lhs, &rhs, &[], Some(&keep))?)
}

/// The three relations of the finite part with the constant `R`:
/// `(L,L)`, `(L̄,L̄)` and `(L,L̄)`.
pub fn check_rll_finite(pair: &LOperatorPair) -> Result<RelationReport> {
    let (r, _) = build_constant_r(pair.profile(), pair.q())?;
    let l = |a, b| Ok(pair.l(a, b).clone());
    let lb = |a, b| Ok(pair.lbar(a, b).clone());
    let mut report = RelationReport::default();
    report.push("rll-finite-LL", rll_residual(pair, &r, l, l)?);
    report.push("rll-finite-LbarLbar", rll_residual(pair, &r, lb, lb)?);
    report.push("rll-finite-LLbar", rll_residual(pair, &r, l, lb)?);
    Ok(report)
}

/// Element-wise commutation relations between entries of `L` and `L̄`,
/// grouped by family, plus the structural zeros of the contraction.
pub fn check_appendix_a(pair: &LOperatorPair) -> Result<RelationReport> {
    let p = pair.profile();
    let n = p.rank();
    let q = pair.q();
    let qq = q - q.inv();
    let keep = pair.space().interior_mask(2);
    let keep = Some(keep.as_slice());
    let zero = SparseOperator::zeros(&pair.space().factors());
    let pp = |a, b| pair.entry_parity(a, b);
    let pa = |a: usize| p.parity(a) as i64;
    let one = real(1.0);
    let mut fam: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut rec = |name: &'static str, r: f64| {
        let e = fam.entry(name).or_insert(0.0);
        *e = e.max(r);
    };
    type Op = SparseOperator;
    // [X,Y]_c = rhs, relative to the products in the bracket
    let check = |x: (&Op, u8), y: (&Op, u8), c: C64, rhs: Option<&Op>| -> Result<f64> {
        let g = graded_commutator(x.0, x.1, y.0, y.1, c)?;
        let xy = x.0.mul(y.0)?;
        let yx = y.0.mul(x.0)?;
        Ok(relative_residual(
            &g,
            rhs.unwrap_or(&zero),
            &[&xy, &yx],
            keep,
        )?)
    };
    let (l, lb) = (|a, b| pair.l(a, b), |a, b| pair.lbar(a, b));
    let ql = |e: i64| q.powi(e as i32);
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                for d in 1..=n {
                    let lcd = (l(c, d), pp(c, d));
                    let lab = (l(a, b), pp(a, b));
                    let lbab = (lb(a, b), pp(a, b));
                    if (b < d && d <= c && c < a)
                        || (d < b && b <= a && a < c)
                        || (d <= c && c < b && b <= a)
                        || (b <= a && a < d && d <= c)
                    {
                        rec("A1-LL-commute", check(lcd, lab, one, None)?);
                    }
                    if d < b && b <= c && c < a {
                        let s = sgn((pp(a, b) as i64) * pa(c) + pa(a) * pa(b));
                        let rhs = l(a, d).mul(l(c, b))?.scale(qq * s);
                        rec("A2-LL-exchange", check(lcd, lab, one, Some(&rhs))?);
                    }
                    if d < b && b <= a && c == a {
                        let x = (l(a, b), pp(a, b));
                        let y = (l(a, d), pp(a, d));
                        rec("A3-LL-row", check(x, y, ql(2 * pa(a) - 1), None)?);
                    }
                    if b <= c && c < a && d == b {
                        let x = (l(c, b), pp(c, b));
                        rec("A4-LL-column", check(x, lab, ql(1 - 2 * pa(b)), None)?);
                    }
                    let lbcd = (lb(c, d), pp(c, d));
                    if (a < c && c <= d && d < b)
                        || (c < a && a <= b && b < d)
                        || (a <= b && b < c && c <= d)
                        || (c <= d && d < a && a <= b)
                    {
                        rec("A6-LbarLbar-commute", check(lbcd, lbab, one, None)?);
                    }
                    if a < c && c <= b && b < d {
                        let s = sgn((pp(a, b) as i64) * pa(d) + pa(a) * pa(b));
                        let rhs = lb(a, d).mul(lb(c, b))?.scale(qq * s);
                        rec("A7-LbarLbar-exchange", check(lbab, lbcd, one, Some(&rhs))?);
                    }
                    if a <= b && b < d && c == a {
                        let x = (lb(a, d), pp(a, d));
                        rec("A8-LbarLbar-row", check(x, lbab, ql(2 * pa(a) - 1), None)?);
                    }
                    if c < a && a <= b && d == b {
                        let x = (lb(c, b), pp(c, b));
                        rec(
                            "A9-LbarLbar-column",
                            check(x, lbab, ql(1 - 2 * pa(b)), None)?,
                        );
                    }
                    if (d < a && a <= b && b < c)
                        || (a < d && d <= c && c < b)
                        || (d <= c && c < a && a <= b)
                        || (a <= b && b < d && d <= c)
                        || (a == b && b == c && c == d)
                    {
                        rec("A11-LLbar-commute", check(lcd, lbab, one, None)?);
                    }
                    let base = (pp(a, b) as i64) * pa(c) + pa(a) * pa(b);
                    if (a <= d && d < b && b < c) || (a < d && d < b && b <= c) {
                        let rhs = lb(a, d).mul(l(c, b))?.scale(qq * sgn(base));
                        rec("A12-LLbar-exchange", check(lcd, lbab, one, Some(&rhs))?);
                    }
                    if (d <= a && a < c && c < b) || (d < a && a < c && c <= b) {
                        let rhs = l(a, d).mul(lb(c, b))?.scale(qq * sgn(base + 1));
                        rec("A13-LLbar-exchange", check(lcd, lbab, one, Some(&rhs))?);
                    }
                    if a < b && c == b && d == a {
                        let rhs = lb(a, a)
                            .mul(l(b, b))?
                            .sub(&l(a, a).mul(lb(b, b))?)?
                            .scale(qq * p.sign(b) as f64);
                        let x = (l(b, a), pp(b, a));
                        rec("A14-LLbar-diagonal", check(x, lbab, one, Some(&rhs))?);
                    }
                    if d <= a && a <= b && d != b && c == a {
                        let x = (l(a, d), pp(a, d));
                        rec("A15-LLbar-row", check(x, lbab, ql(2 * pa(a) - 1), None)?);
                    }
                    if a <= b && b <= c && a != c && d == b {
                        let x = (l(c, b), pp(c, b));
                        rec("A16-LLbar-column", check(x, lbab, ql(1 - 2 * pa(b)), None)?);
                    }
                }
            }
        }
    }
    let mut report = RelationReport::default();
    for (k, v) in fam {
        report.push(k, v);
    }

    // exact identities
    let mut nil: f64 = 0.0;
    let mut rll0: f64 = 0.0;
    for a in 1..=n {
        for b in 1..=n {
            if pp(a, b) == 1 {
                nil = nil.max(l(a, b).mul(l(a, b))?.max_abs());
                nil = nil.max(lb(a, b).mul(lb(a, b))?.max_abs());
            }
            if a < b {
                rll0 = rll0.max(l(a, b).max_abs()).max(lb(b, a).max_abs());
            }
        }
    }
    report.push_exact("odd-nilpotency", nil);
    report.push_exact("triangularity", rll0);
    let iset = pair.index_set();
    let red2 = iset
        .complement()
        .iter()
        .map(|&a| lb(a, a).max_abs())
        .fold(0.0, f64::max);
    report.push_exact("lbar-vanishes-on-complement", red2);
    let mut red1: f64 = 0.0;
    for &i in iset.members() {
        let prod = pair
            .diag(i)
            .mul(pair.diag_bar(i).expect("present for i in I"));
        let e = prod.exps.iter().map(|e| e.abs()).max().unwrap_or(0) as f64;
        red1 = red1.max((prod.coeff - 1.0).norm()).max(e);
    }
    report.push_exact("diagonal-inverse", red1);
    if let Some((k, m)) = contiguous(iset) {
        let mut z: f64 = 0.0;
        for i in 1..=n {
            for j in 1..=n {
                if i > k + m && j <= k {
                    z = z.max(l(i, j).max_abs());
                }
                if (1 < i && i < j && j <= k) || (k + m < i && i < j) {
                    z = z.max(lb(i, j).max_abs());
                }
            }
        }
        report.push_exact("subsidiary-zeros", z);
    }
    Ok(report)
}

/// `I = {k+1, …, k+m}` → `Some((k, m))`.
fn contiguous(iset: &IndexSet) -> Option<(usize, usize)> {
    let m = iset.members();
    let first = *m.first()?;
    m.windows(2)
        .all(|w| w[1] == w[0] + 1)
        .then_some((first - 1, m.len()))
}

/// Multiply `L` and `L̄` by constant diagonal matrices on the auxiliary
/// index: `L_ab ↦ h_L[a] L_ab h_R[b]`.
#[allow(clippy::needless_range_loop)]
pub fn apply_diagonal_twist(
    pair: &LOperatorPair,
    h_left: &[C64],
    h_right: &[C64],
) -> Result<LOperatorPair> {
    let n = pair.rank();
    if h_left.len() != n
        || h_right.len() != n
        || h_left.iter().chain(h_right).any(|h| h.norm() == 0.0)
    {
        return Err(LOperatorError::BadTwist { expected: n });
    }
    let mut out = pair.clone();
    for a in 0..n {
        for b in 0..n {
            let c = h_left[a] * h_right[b];
            out.l[a * n + b] = pair.l[a * n + b].scale(c);
            out.lbar[a * n + b] = pair.lbar[a * n + b].scale(c);
        }
        let c = h_left[a] * h_right[a];
        out.diag[a] = pair.diag[a].scale(c);
        out.diag_bar[a] = pair.diag_bar[a].as_ref().map(|d| d.scale(c));
    }
    Ok(out)
}

/// Images of the Chevalley generators on the Fock space.
#[derive(Debug, Clone)]
pub struct RhoImage {
    pub x: C64,
    /// `e_0 … e_{n−1}`.
    pub e: Vec<SparseOperator>,
    pub f: Vec<SparseOperator>,
    /// `q^{h_i}` as exact diagonals.
    pub qh: Vec<QPowDiag>,
    /// Parity of `e_i`, `f_i`.
    pub parity: Vec<u8>,
    /// Cartan exponents `k_1 … k_n` (stored at `i−1`), read off `L_ii`.
    pub k: Vec<Vec<i64>>,
    /// `k̄_i` read off `L̄_ii`; `None` where `L̄_ii = 0`.
    pub kbar: Vec<Option<Vec<i64>>>,
}

pub fn rho_i(pair: &LOperatorPair, x: C64) -> Result<RhoImage> {
    if x == real(0.0) {
        return Err(LOperatorError::ZeroSpectralParameter);
    }
    let p = pair.profile();
    let n = p.rank();
    let q = pair.q();
    let qq = q - q.inv();
    let f_ = pair.space().factors();
    let inv = |i: usize| pair.diag(i).inverse().to_operator(q, &f_);
    let s = |k: usize| p.sign(k) as f64;
    let mut e = Vec::new();
    let mut f = Vec::new();
    let mut qh = Vec::new();
    if n >= 2 {
        e.push(pair.lbar(1, n).mul(&inv(n))?.scale(-x * s(1) / qq));
        f.push(pair.l(n, n).mul(pair.l(n, 1))?.scale((x * qq).inv()));
        qh.push(pair.diag(n).mul(&pair.diag(1).inverse()));
        for i in 1..n {
            e.push(pair.l(i + 1, i).mul(&inv(i))?.scale(real(s(i + 1)) / qq));
            f.push(pair.l(i, i).mul(pair.lbar(i, i + 1))?.scale(-qq.inv()));
            qh.push(pair.diag(i).mul(&pair.diag(i + 1).inverse()));
        }
    }
    let parity = (0..e.len()).map(|i| chevalley_parity(p, i)).collect();
    let read = |d: &QPowDiag, i: usize| -> Vec<i64> {
        d.exps.iter().map(|v| v * p.sign(i) as i64).collect()
    };
    let k = (1..=n).map(|i| read(pair.diag(i), i)).collect();
    let kbar = (1..=n)
        .map(|i| pair.diag_bar(i).map(|d| read(d, i)))
        .collect();
    Ok(RhoImage {
        x,
        e,
        f,
        qh,
        parity,
        k,
        kbar,
    })
}

/// Contracted `[e,f]` relations, Cartan relations, and the Serre-type
/// relations selected by the membership pattern of the indices in `I`.
pub fn check_contracted_relations(pair: &LOperatorPair, x: C64) -> Result<RelationReport> {
    let rho = rho_i(pair, x)?;
    let p = pair.profile();
    let n = p.rank();
    let q = pair.q();
    let qq = q - q.inv();
    let mut report = RelationReport::default();
    if n < 2 {
        return Ok(report);
    }
    let fac = pair.space().factors();
    let iset = pair.index_set();
    let in_i = |k: usize| iset.contains(k);
    let masks: Vec<Vec<bool>> = (0..=4).map(|d| pair.space().interior_mask(d)).collect();
    let keep = |d: usize| Some(masks[d].as_slice());
    let zero = SparseOperator::zeros(&fac);
    let one = real(1.0);
    let e = |i: usize| Graded::of(&rho.e[i % n], rho.parity[i % n]);
    let f = |i: usize| Graded::of(&rho.f[i % n], rho.parity[i % n]);
    let a = |i: usize, j: usize| cartan(p, i, j);
    let qa = |i: usize, j: usize, sign: i32| q.powi(sign * a(i, j));

    for i in 0..n {
        let (ai, bi) = (if i == 0 { n } else { i }, i + 1);
        let qh = rho.qh[i].to_operator(q, &fac);
        let qhinv = rho.qh[i].inverse().to_operator(q, &fac);
        for j in 0..n {
            let lhs = e(i).bracket(&f(j), one, keep(2))?;
            let rhs = if i != j {
                zero.clone()
            } else {
                match (in_i(ai), in_i(bi)) {
                    (true, true) => qh.sub(&qhinv)?.scale(qq.inv()),
                    (false, true) => qh.scale(qq.inv()),
                    (true, false) => qhinv.scale(-qq.inv()),
                    (false, false) => zero.clone(),
                }
            };
            let target = Graded {
                op: rhs,
                parity: 0,
                scale: 0.0,
            };
            report.push(
                format!("ef-cont[{i},{j}]"),
                lhs.equality_residual(&target, keep(2))?,
            );
        }
        if !in_i(i) && !in_i(i + 1) && i >= 1 {
            report.push_exact(format!("f-zero[{i}]"), rho.f[i].max_abs());
        }
    }
    if !in_i(n) && !in_i(1) {
        report.push_exact("f-zero[0]", rho.f[0].max_abs());
    }

    // Cartan relations [k_i, e_j] = (δ_{i,j} − δ_{i,j+1}) e_j and the f analogue
    for i in 1..=n {
        let k = SparseOperator::diagonal(
            &fac,
            &rho.k[i - 1]
                .iter()
                .map(|&v| real(v as f64))
                .collect::<Vec<_>>(),
        );
        for j in 0..n {
            let jj = if j == 0 { n } else { j };
            let coef = i32::from(i == jj) - i32::from(i == jj % n + 1);
            let c = real(coef as f64);
            let ke = graded_commutator(&k, 0, &rho.e[j], rho.parity[j], one)?;
            report.push(
                format!("cartan-e[{i},{j}]"),
                relative_residual(&ke, &rho.e[j].scale(c), &[], keep(1))?,
            );
            let kf = graded_commutator(&k, 0, &rho.f[j], rho.parity[j], one)?;
            report.push(
                format!("cartan-f[{i},{j}]"),
                relative_residual(&kf, &rho.f[j].scale(-c), &[], keep(1))?,
            );
        }
        if let Some(kb) = &rho.kbar[i - 1] {
            let d = kb
                .iter()
                .zip(&rho.k[i - 1])
                .map(|(a, b)| (a + b).abs())
                .max()
                .unwrap_or(0);
            report.push_exact(format!("kbar-minus-k[{i}]"), d as f64);
        }
    }

    let mut zero_rel =
        |name: String, g: Graded, d: usize| report.push(name, g.vanishing_residual(keep(d)));
    // the affine (1,1) Cartan matrix vanishes identically; no standard relations there
    let standard = !(p.m == 1 && p.n == 1);
    for i in 0..n {
        for j in 0..n {
            if standard && i != j && a(i, j) == 0 {
                zero_rel(
                    format!("com-ee[{i},{j}]"),
                    e(i).bracket(&e(j), one, keep(2))?,
                    2,
                );
                zero_rel(
                    format!("com-ff[{i},{j}]"),
                    f(i).bracket(&f(j), one, keep(2))?,
                    2,
                );
            }
            if standard && i != j && a(i, j).abs() == 1 && a(i, i) != 0 {
                let g = e(i).bracket(&e(i).bracket(&e(j), q, keep(3))?, q.inv(), keep(3))?;
                zero_rel(format!("serre-aff-e[{i},{j}]"), g, 3);
                let g = f(i).bracket(&f(i).bracket(&f(j), q.inv(), keep(3))?, q, keep(3))?;
                zero_rel(format!("serre-aff-f[{i},{j}]"), g, 3);
            }
        }
        let i1 = (i + 1) % n;
        if n >= 3 {
            if in_i(i) && in_i(i + 2) && !in_i(i + 1) {
                zero_rel(
                    format!("serre-cont1-e[{i}]"),
                    e(i).bracket(&e(i1), qa(i, i + 1, -1), keep(2))?,
                    2,
                );
                zero_rel(
                    format!("serre-cont1-f[{i}]"),
                    f(i).bracket(&f(i1), qa(i, i + 1, 1), keep(2))?,
                    2,
                );
            }
            if !in_i(i) && !in_i(i + 2) && in_i(i + 1) {
                zero_rel(
                    format!("serre-cont2-e[{i}]"),
                    e(i).bracket(&e(i1), qa(i, i + 1, 1), keep(2))?,
                    2,
                );
                zero_rel(
                    format!("serre-cont2-f[{i}]"),
                    f(i).bracket(&f(i1), qa(i, i + 1, -1), keep(2))?,
                    2,
                );
            }
        }
    }
    if n == 2 && !p.is_super() {
        let sg = match (in_i(1), in_i(2)) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        };
        if sg != 0 {
            let k3 = keep(3);
            let (a01, a10) = (a(0, 1), a(1, 0));
            let g = e(0).bracket(&e(0).bracket(&e(1), q.powi(sg * a01), k3)?, one, k3)?;
            zero_rel("serre-cont3-e01".into(), g, 3);
            let g = e(1).bracket(&e(1).bracket(&e(0), q.powi(-sg * a10), k3)?, one, k3)?;
            zero_rel("serre-cont3-e10".into(), g, 3);
            let g = f(0).bracket(&f(0).bracket(&f(1), q.powi(-sg * a01), k3)?, one, k3)?;
            zero_rel("serre-cont3-f01".into(), g, 3);
            let g = f(1).bracket(&f(1).bracket(&f(0), q.powi(sg * a10), k3)?, one, k3)?;
            zero_rel("serre-cont3-f10".into(), g, 3);
        }
    }
    // quartic variants: [x, [y, [x, z]_c]] with (x,y,z) and c per pattern
    let k4 = keep(4);
    let mut quartic = |name: &str,
                       g: &dyn Fn(usize) -> Graded,
                       (u, v, w): (usize, usize, usize),
                       c: C64|
     -> Result<()> {
        let inner = g(u).bracket(&g(w), c, k4)?;
        let x = g(u).bracket(&g(v).bracket(&inner, one, k4)?, one, k4)?;
        zero_rel(name.to_string(), x, 4);
        Ok(())
    };
    let (qi, qv) = (q, q.inv());
    match (p.m, p.n) {
        (2, 1) => {
            if !in_i(1) && in_i(2) && in_i(3) {
                quartic("serre-cont4-e", &e, (2, 0, 1), qi)?;
                quartic("serre-cont4-f", &f, (2, 0, 1), qv)?;
            }
            if in_i(1) && !in_i(2) && !in_i(3) {
                quartic("serre-cont5-e", &e, (2, 0, 1), qv)?;
            }
            if !in_i(2) && in_i(1) && in_i(3) {
                quartic("serre-cont6-e", &e, (0, 2, 1), qv)?;
                quartic("serre-cont6-f", &f, (0, 2, 1), qi)?;
            }
            if in_i(2) && !in_i(1) && !in_i(3) {
                quartic("serre-cont7-e", &e, (0, 2, 1), qi)?;
            }
        }
        (1, 2) => {
            if !in_i(3) && in_i(1) && in_i(2) {
                quartic("serre-cont8-e", &e, (1, 0, 2), qi)?;
                quartic("serre-cont8-f", &f, (1, 0, 2), qv)?;
            }
            if in_i(3) && !in_i(1) && !in_i(2) {
                quartic("serre-cont9-e", &e, (1, 0, 2), qv)?;
            }
            if !in_i(2) && in_i(1) && in_i(3) {
                quartic("serre-cont10-e", &e, (0, 1, 2), qv)?;
                quartic("serre-cont10-f", &f, (0, 1, 2), qi)?;
            }
            if in_i(2) && !in_i(1) && !in_i(3) {
                quartic("serre-cont11-e", &e, (0, 1, 2), qi)?;
            }
        }
        _ => {}
    }
    if n >= 4 {
        let k3 = keep(3);
        for i in 0..n {
            let (i1, i2) = ((i + 1) % n, (i + 2) % n);
            if in_i(i) && in_i(i + 1) && in_i(i + 3) && !in_i(i + 2) {
                let g = e(i).bracket(&e(i1), qa(i, i + 1, -1), k3)?.bracket(
                    &e(i2),
                    qa(i + 1, i + 2, -1),
                    k3,
                )?;
                zero_rel(format!("serre-cont12-e[{i}]"), g, 3);
                let g = f(i).bracket(&f(i1), qa(i, i + 1, 1), k3)?.bracket(
                    &f(i2),
                    qa(i + 1, i + 2, 1),
                    k3,
                )?;
                zero_rel(format!("serre-cont12-f[{i}]"), g, 3);
            }
            if !in_i(i) && !in_i(i + 1) && !in_i(i + 3) && in_i(i + 2) {
                let g = e(i).bracket(&e(i1), qa(i, i + 1, 1), k3)?.bracket(
                    &e(i2),
                    qa(i + 1, i + 2, 1),
                    k3,
                )?;
                zero_rel(format!("serre-cont13-e[{i}]"), g, 3);
            }
        }
    }
    Ok(report)
}

/// Intertwining of `L_I(y/x)` between `ρ_I(x) ⊗ π(y)` and its opposite
/// coproduct image: the `k_i`, `e_i` and truncated `f_i` relations.
pub fn check_intertwining(pair: &LOperatorPair, x: C64, y: C64) -> Result<RelationReport> {
    let p = pair.profile();
    let n = p.rank();
    let q = pair.q();
    let mut report = RelationReport::default();
    if n < 2 {
        return Ok(report);
    }
    let rho = rho_i(pair, x)?;
    let rep = evaluation_images(p, y)?;
    let lop = evaluate_l(pair, y / x)?.matrix;
    let fac = pair.space().factors();
    let v = pair.fundamental();
    let id_f = pair.fock_identity();
    let id_v = SparseOperator::identity(std::slice::from_ref(&v));
    let kr = |a: &SparseOperator, b: &SparseOperator| graded_kron(a, b);
    let keep = pair.keep(2, n);
    let keep = Some(keep.as_slice());
    let iset = pair.index_set();
    let theta = |k: usize| {
        if iset.contains(k) {
            real(1.0)
        } else {
            real(0.0)
        }
    };
    let push = |report: &mut RelationReport,
                name: String,
                l: SparseOperator,
                r: SparseOperator|
     -> Result<()> {
        let lhs = l.mul(&lop)?;
        let rhs = lop.mul(&r)?;
        report.push(name, relative_residual(&lhs, &rhs, &[], keep)?);
        Ok(())
    };
    for i in 1..=n {
        let kd: Vec<C64> = rho.k[i - 1].iter().map(|&v| real(v as f64)).collect();
        let t = kr(&id_f, &matrix_unit(&v, i, i)?)?
            .add(&kr(&SparseOperator::diagonal(&fac, &kd), &id_v)?)?;
        push(&mut report, format!("intert-k[{i}]"), t.clone(), t)?;
    }
    for i in 0..n {
        let (a, b) = (if i == 0 { n } else { i }, i + 1);
        let qmh = rep.qpow_h(i, q, -1);
        let qh = rep.qpow_h(i, q, 1);
        let rqh = rho.qh[i].to_operator(q, &fac);
        let rqmh = rho.qh[i].inverse().to_operator(q, &fac);
        let l = kr(&id_f, &rep.e[i])?.add(&kr(&rho.e[i], &qmh)?)?;
        let r = kr(&rho.e[i], &id_v)?.add(&kr(&rqmh, &rep.e[i])?)?;
        push(&mut report, format!("intert-e[{i}]"), l, r)?;
        let l = kr(&rqh, &rep.f[i])?
            .scale(theta(b))
            .add(&kr(&rho.f[i], &id_v)?)?;
        let r = kr(&rho.f[i], &qh)?.add(&kr(&id_f, &rep.f[i])?.scale(theta(a)))?;
        push(&mut report, format!("intert-f[{i}]"), l, r)?;
    }
    Ok(report)
}

/// Vacuum eigenvalues of the diagonal entries of `L_I(x)`.
#[derive(Debug, Clone)]
pub struct VacuumWeights {
    /// `ν_i` with `L_ii(x)|0⟩ = ν_i|0⟩`.
    pub nu: Vec<C64>,
    /// `ν_i / ν_{i+1}`, `i = 1..n−1`.
    pub ratios: Vec<C64>,
    pub report: RelationReport,
}

pub fn vacuum_highest_weight(pair: &LOperatorPair, x: C64) -> Result<VacuumWeights> {
    let n = pair.rank();
    let vac = build_vacuum(pair.space());
    let iset = pair.index_set();
    let expected = |i: usize| {
        if iset.contains(i) {
            1.0 - x.inv()
        } else {
            real(1.0)
        }
    };
    let mut report = RelationReport::default();
    let mut nu = Vec::new();
    let mut eig: f64 = 0.0;
    let mut weight: f64 = 0.0;
    for i in 1..=n {
        let v = pair.entry(i, i, x)?.apply(&vac);
        let val = v[0];
        eig = eig.max(v.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max));
        weight = weight.max((val - expected(i)).norm() / expected(i).norm().max(1.0));
        nu.push(val);
    }
    report.push("vacuum-eigenvector", eig);
    report.push("vacuum-weight", weight);
    let ratios: Vec<C64> = (1..n).map(|i| nu[i - 1] / nu[i]).collect();
    let mut rr: f64 = 0.0;
    for i in 1..n {
        let target = expected(i) / expected(i + 1);
        rr = rr.max((ratios[i - 1] - target).norm() / target.norm().max(1.0));
    }
    report.push("drinfeld-ratio", rr);
    if iset.len() == n {
        let mut low: f64 = 0.0;
        for i in 1..=n {
            for j in 1..i {
                let v = pair.entry(i, j, x)?.apply(&vac);
                low = low.max(v.iter().map(|c| c.norm()).fold(0.0, f64::max));
            }
        }
        report.push_exact("lowering-annihilates-vacuum", low);
    }
    Ok(VacuumWeights { nu, ratios, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_linalg::c64;

    fn setup(m: usize, nn: usize, members: &[usize], cutoff: usize, q: C64) -> LOperatorPair {
        let p = ParityProfile::new(m, nn).unwrap();
        let iset = IndexSet::new(p, members).unwrap();
        let space = FockSpace::new(&iset, cutoff).unwrap();
        build_l_pair(&iset, &space, q).unwrap()
    }

    #[test]
    fn empty_set_is_identity() {
        let pair = setup(2, 1, &[], 4, c64(0.5, 0.2));
        for a in 1..=3 {
            for b in 1..=3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert_eq!(pair.l(a, b).get(0, 0), real(want));
                assert!(pair.lbar(a, b).is_zero());
            }
        }
        let ev = evaluate_l(&pair, c64(0.3, 1.0)).unwrap();
        assert_eq!(
            ev.matrix.to_dense(),
            SparseOperator::identity(&[pair.fundamental()]).to_dense()
        );
    }

    #[test]
    fn full_set_evaluates_to_scalar() {
        let x = c64(1.2, -0.4);
        let pair = setup(1, 2, &[1, 2, 3], 4, c64(0.5, 0.2));
        let ev = evaluate_l(&pair, x).unwrap();
        for k in 0..3 {
            assert!((ev.matrix.get(k, k) - (1.0 - x.inv())).norm() < 1e-15);
        }
        assert_eq!(ev.matrix.nnz(), 3);
    }

    #[test]
    fn single_case_lowering_entry_is_annihilator() {
        let q = c64(0.5, 0.2);
        let pair = setup(2, 0, &[1], 4, q);
        let c21 = pair.generators().c(0);
        assert_eq!(
            crate::graded_linalg::residual(pair.l(2, 1), c21).unwrap(),
            0.0
        );
    }

    #[test]
    fn intermediate_rejected() {
        let p = ParityProfile::new(2, 2).unwrap();
        let iset = IndexSet::new(p, &[1, 2]).unwrap();
        let space = FockSpace::new(&iset, 3).unwrap();
        assert!(matches!(
            build_l_pair(&iset, &space, c64(0.5, 0.1)),
            Err(LOperatorError::Unsupported(_))
        ));
    }

    #[test]
    fn zero_x_rejected() {
        let pair = setup(2, 0, &[1], 3, c64(0.5, 0.2));
        assert!(evaluate_l(&pair, real(0.0)).is_err());
    }

    #[test]
    fn diagonal_twist_products_and_rll() {
        let q = c64(0.55, -0.2);
        let pair = setup(2, 1, &[2, 3], 5, q);
        let hl = [c64(1.3, 0.1), c64(0.7, -0.2), c64(-0.4, 0.9)];
        let hr = [c64(0.6, 0.5), c64(1.1, 0.0), c64(0.2, -1.0)];
        let tw = apply_diagonal_twist(&pair, &hl, &hr).unwrap();
        for &i in pair.index_set().members() {
            let prod = tw.diag(i).mul(tw.diag_bar(i).unwrap());
            let want = (hl[i - 1] * hr[i - 1]).powi(2);
            assert!((prod.coeff - want).norm() < 1e-14);
            assert!(prod.exps.iter().all(|&e| e == 0));
        }
        let (x, y) = (c64(0.8, 0.3), c64(1.4, -0.6));
        assert!(check_rll_affine(&tw, x, y).unwrap() < 1e-12);
        let id = apply_diagonal_twist(&pair, &[real(1.0); 3], &[real(1.0); 3]).unwrap();
        assert_eq!(
            crate::graded_linalg::residual(id.l(3, 2), pair.l(3, 2)).unwrap(),
            0.0
        );
        assert!(apply_diagonal_twist(&pair, &[real(0.0); 3], &hr).is_err());
    }

    #[test]
    fn oscillator_automorphism_covariance() {
        use crate::fock::OscAutomorphismParams;
        let q = c64(0.5, 0.35);
        let p = ParityProfile::new(2, 1).unwrap();
        let iset = IndexSet::new(p, &[1]).unwrap();
        let space = FockSpace::new(&iset, 6).unwrap();
        let gens = GeneratorSet::new(&space, q).unwrap();
        let params = OscAutomorphismParams {
            xi: vec![c64(1.7, 0.4), c64(-0.3, 0.8)],
            eta: vec![
                vec![c64(0.3, 0.0), c64(-0.5, 0.2)],
                vec![c64(-0.5, 0.2), c64(0.1, 0.0)],
            ],
        };
        let pair =
            LOperatorPair::from_generators(&gens.apply_osc_automorphism(&params).unwrap()).unwrap();
        assert!(check_rll_affine(&pair, c64(0.9, 0.2), c64(-0.4, 1.3)).unwrap() < 1e-10);
    }

    #[test]
    fn vacuum_weights_single() {
        let x = c64(1.5, 0.5);
        let pair = setup(2, 1, &[1], 4, c64(0.5, 0.2));
        let w = vacuum_highest_weight(&pair, x).unwrap();
        assert!((w.ratios[0] - (1.0 - x.inv())).norm() < 1e-14);
        assert!((w.ratios[1] - 1.0).norm() < 1e-14);
        let w = vacuum_highest_weight(&setup(2, 1, &[], 4, c64(0.5, 0.2)), x).unwrap();
        assert!(w.nu.iter().all(|v| (v - 1.0).norm() == 0.0));
    }

    #[test]
    fn rho_images_basic_properties() {
        let x = c64(0.9, -0.7);
        // (3,0), I = {1}: indices 2,3 in the complement so f_2 = 0
        let pair = setup(3, 0, &[1], 4, c64(0.45, 0.25));
        let rho = rho_i(&pair, x).unwrap();
        assert!(rho.f[2].is_zero());
        assert!(rho.kbar[1].is_none() && rho.kbar[2].is_none());
        let k1 = &rho.k[0];
        assert!(rho.kbar[0]
            .as_ref()
            .unwrap()
            .iter()
            .zip(k1)
            .all(|(a, b)| a + b == 0));
    }
}
