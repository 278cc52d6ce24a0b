//! The Perk–Schultz R-matrix, the graded Yang–Baxter equation and the
//! fundamental evaluation representation of the Chevalley generators.

use thiserror::Error;

use crate::graded_linalg::{
    embed_block, graded_commutator, graded_kron, matrix_unit, real, relative_residual, GradedSpace,
    LinalgError, ParityProfile, RelationReport, SparseOperator, C64,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RMatrixError {
    #[error("q = {0} is degenerate (0 or ±1)")]
    DegenerateQ(C64),
    #[error("spectral parameter must be non-zero")]
    ZeroSpectralParameter,
    #[error("the affine evaluation map is not defined for (M,N) = (1,1)")]
    AffineOneOne,
    #[error("the Chevalley presentation needs M+N >= 2")]
    RankTooSmall,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, RMatrixError>;

pub(crate) fn check_q(q: C64) -> Result<()> {
    if q.norm() < 1e-300 || (q - 1.0).norm() < 1e-12 || (q + 1.0).norm() < 1e-12 {
        return Err(RMatrixError::DegenerateQ(q));
    }
    Ok(())
}

fn unit(v: &GradedSpace, i: usize, j: usize) -> SparseOperator {
    matrix_unit(v, i, j).expect("indices within the fundamental")
}

/// The constant parts `(R, R̄)` with `R(x1,x2) = R − (x1/x2) R̄`.
pub fn build_constant_r(
    profile: ParityProfile,
    q: C64,
) -> Result<(SparseOperator, SparseOperator)> {
    check_q(q)?;
    let v = profile.fundamental();
    let qq = q - q.inv();
    let mut r_terms: Vec<(C64, SparseOperator)> = Vec::new();
    let mut rb_terms: Vec<(C64, SparseOperator)> = Vec::new();
    for i in profile.indices() {
        let pi = profile.parity(i) as i32;
        let eii = graded_kron(&unit(&v, i, i), &unit(&v, i, i))?;
        r_terms.push((q.powi(1 - 2 * pi), eii.clone()));
        rb_terms.push((q.powi(-1 + 2 * pi), eii));
        for j in profile.indices() {
            if i != j {
                let d = graded_kron(&unit(&v, i, i), &unit(&v, j, j))?;
                r_terms.push((real(1.0), d.clone()));
                rb_terms.push((real(1.0), d));
            }
            let sj = profile.sign(j) as f64;
            let x = graded_kron(&unit(&v, i, j), &unit(&v, j, i))?;
            if i < j {
                r_terms.push((qq * sj, x));
            } else if i > j {
                rb_terms.push((-qq * sj, x));
            }
        }
    }
    let collect = |t: &[(C64, SparseOperator)]| {
        SparseOperator::linear_combination(&t.iter().map(|(c, o)| (*c, o)).collect::<Vec<_>>())
    };
    Ok((collect(&r_terms)?, collect(&rb_terms)?))
}

/// `R(x1,x2)` on fundamental ⊗ fundamental (overall normalisation 1).
#[derive(Debug, Clone)]
pub struct RMatrix {
    pub profile: ParityProfile,
    pub q: C64,
    pub x1: C64,
    pub x2: C64,
    pub matrix: SparseOperator,
}

pub fn build_ps_rmatrix(profile: ParityProfile, q: C64, x1: C64, x2: C64) -> Result<RMatrix> {
    if x2 == real(0.0) {
        return Err(RMatrixError::ZeroSpectralParameter);
    }
    let (r, rb) = build_constant_r(profile, q)?;
    let matrix = SparseOperator::linear_combination(&[(real(1.0), &r), (-(x1 / x2), &rb)])?;
    Ok(RMatrix {
        profile,
        q,
        x1,
        x2,
        matrix,
    })
}

/// Relative residual of `R¹²(x1,x2)R¹³(x1,x3)R²³(x2,x3) = R²³R¹³R¹²`.
pub fn check_graded_ybe(profile: ParityProfile, q: C64, x1: C64, x2: C64, x3: C64) -> Result<f64> {
    if [x1, x2, x3].iter().any(|x| *x == real(0.0)) {
        return Err(RMatrixError::ZeroSpectralParameter);
    }
    let v = profile.fundamental();
    let f3 = vec![v.clone(), v.clone(), v.clone()];
    let r12 = embed_block(&build_ps_rmatrix(profile, q, x1, x2)?.matrix, 0, &f3)?;
    let r23 = embed_block(&build_ps_rmatrix(profile, q, x2, x3)?.matrix, 1, &f3)?;
    let r13 = r13_embedding(&build_ps_rmatrix(profile, q, x1, x3)?.matrix, &v)?;
    let lhs = r12.mul(&r13)?.mul(&r23)?;
    let rhs = r23.mul(&r13)?.mul(&r12)?;
    Ok(relative_residual(&lhs, &rhs, &[], None)?)
}

/// Embeds an operator on `V⊗V` into factors 1 and 3 of `V⊗V⊗V`, by
/// decomposing it into graded products of matrix units.
pub(crate) fn r13_embedding(r: &SparseOperator, v: &GradedSpace) -> Result<SparseOperator> {
    let n = v.dim();
    let id = SparseOperator::identity(std::slice::from_ref(v));
    let mut terms = Vec::new();
    for (row, col, val) in r.iter() {
        let (ra, rb) = (row / n, row % n);
        let (ca, cb) = (col / n, col % n);
        // undo the Koszul sign of the two-factor product
        let odd = ((v.parity(rb) + v.parity(cb)) % 2) * v.parity(ca) == 1;
        let coeff = if odd { -val } else { val };
        let a = unit(v, ra + 1, ca + 1);
        let b = unit(v, rb + 1, cb + 1);
        terms.push((coeff, graded_kron(&graded_kron(&a, &id)?, &b)?));
    }
    let refs: Vec<(C64, &SparseOperator)> = terms.iter().map(|(c, o)| (*c, o)).collect();
    if refs.is_empty() {
        let f3 = vec![v.clone(), v.clone(), v.clone()];
        return Ok(SparseOperator::zeros(&f3));
    }
    Ok(SparseOperator::linear_combination(&refs)?)
}

/// The Cartan matrix `a_ij`, `i,j ∈ {0..M+N−1}` read modulo `M+N`.
pub fn cartan(profile: ParityProfile, i: usize, j: usize) -> i32 {
    let n = profile.rank();
    let s = |k: usize| profile.sign(k % n);
    let d = |a: usize, b: usize| i32::from(a % n == b % n);
    (s(i) + s(i + 1)) * d(i, j) - s(i + 1) * d(i, j + n - 1) - s(i) * d(i, j + 1)
}

/// Parity of the Chevalley generator `e_i` (`i` read modulo `M+N`).
pub fn chevalley_parity(profile: ParityProfile, i: usize) -> u8 {
    (profile.parity(i) + profile.parity(i + 1)) % 2
}

/// Images of the Chevalley generators under the fundamental evaluation map.
#[derive(Debug, Clone)]
pub struct FundamentalRep {
    pub profile: ParityProfile,
    pub y: C64,
    pub e: Vec<SparseOperator>,
    pub f: Vec<SparseOperator>,
    /// `h_i` as integer diagonals.
    pub h: Vec<Vec<i64>>,
    /// `k_i ↦ E_ii`, `i = 1..M+N` (stored at `i−1`).
    pub k: Vec<SparseOperator>,
}

impl FundamentalRep {
    pub fn h_op(&self, i: usize) -> SparseOperator {
        let v = self.profile.fundamental();
        let d: Vec<C64> = self.h[i].iter().map(|&x| real(x as f64)).collect();
        SparseOperator::diagonal(&[v], &d)
    }

    pub fn qpow_h(&self, i: usize, q: C64, sign: i32) -> SparseOperator {
        let v = self.profile.fundamental();
        let d: Vec<C64> = self.h[i].iter().map(|&x| q.powi(sign * x as i32)).collect();
        SparseOperator::diagonal(&[v], &d)
    }
}

pub fn fundamental_rep(profile: ParityProfile, y: C64) -> Result<FundamentalRep> {
    if profile.m == 1 && profile.n == 1 {
        return Err(RMatrixError::AffineOneOne);
    }
    evaluation_images(profile, y)
}

/// The same matrices without the (1,1) exclusion. The intertwining relations
/// only use them as matrices, so they stay meaningful there.
pub(crate) fn evaluation_images(profile: ParityProfile, y: C64) -> Result<FundamentalRep> {
    let n = profile.rank();
    if n < 2 {
        return Err(RMatrixError::RankTooSmall);
    }
    if y == real(0.0) {
        return Err(RMatrixError::ZeroSpectralParameter);
    }
    let v = profile.fundamental();
    let s = |k: usize| profile.sign(k) as f64;
    let mut e = vec![unit(&v, n, 1).scale(y)];
    let mut f = vec![unit(&v, 1, n).scale(real(s(n)) / y)];
    let mut h = Vec::new();
    let diag_h = |a: usize, b: usize| -> Vec<i64> {
        (1..=n)
            .map(|k| {
                let mut x = 0;
                if k == a {
                    x += profile.sign(a) as i64;
                }
                if k == b {
                    x -= profile.sign(b) as i64;
                }
                x
            })
            .collect()
    };
    h.push(diag_h(n, 1));
    for i in 1..n {
        e.push(unit(&v, i, i + 1));
        f.push(unit(&v, i + 1, i).scale(real(s(i))));
        h.push(diag_h(i, i + 1));
    }
    let k = (1..=n).map(|i| unit(&v, i, i)).collect();
    Ok(FundamentalRep {
        profile,
        y,
        e,
        f,
        h,
        k,
    })
}

/// A homogeneous operator built from nested generalised commutators, carrying
/// the largest product formed along the way as its residual scale.
#[derive(Debug, Clone)]
pub(crate) struct Graded {
    pub op: SparseOperator,
    pub parity: u8,
    pub scale: f64,
}

fn projected_max(op: &SparseOperator, keep: Option<&[bool]>) -> f64 {
    match keep {
        Some(k) => op.restrict_columns(k).max_abs(),
        None => op.max_abs(),
    }
}

impl Graded {
    pub fn of(op: &SparseOperator, parity: u8) -> Self {
        Self {
            op: op.clone(),
            parity,
            scale: 0.0,
        }
    }

    /// `[self, other]_c`.
    pub fn bracket(
        &self,
        other: &Graded,
        c: C64,
        keep: Option<&[bool]>,
    ) -> std::result::Result<Graded, LinalgError> {
        let xy = self.op.mul(&other.op)?;
        let yx = other.op.mul(&self.op)?;
        let sign = if self.parity * other.parity % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        let op = SparseOperator::linear_combination(&[(real(1.0), &xy), (-c * sign, &yx)])?;
        let scale = self
            .scale
            .max(other.scale)
            .max(projected_max(&xy, keep))
            .max(c.norm() * projected_max(&yx, keep));
        Ok(Graded {
            op,
            parity: (self.parity + other.parity) % 2,
            scale,
        })
    }

    /// Relative size of `self` for an identity `self = 0`.
    pub fn vanishing_residual(&self, keep: Option<&[bool]>) -> f64 {
        projected_max(&self.op, keep) / self.scale.max(1.0)
    }

    /// Relative residual of `self = other`.
    pub fn equality_residual(
        &self,
        other: &Graded,
        keep: Option<&[bool]>,
    ) -> std::result::Result<f64, LinalgError> {
        let diff = self.op.sub(&other.op)?;
        Ok(projected_max(&diff, keep) / self.scale.max(other.scale).max(1.0))
    }
}

/// Checks the defining relations of `U_q(sl(M|N)^)` on the fundamental evaluation representation.
pub fn check_chevalley_relations(rep: &FundamentalRep, q: C64) -> Result<RelationReport> {
    check_q(q)?;
    let p = rep.profile;
    let n = p.rank();
    let mut report = RelationReport::default();
    let par = |i: usize| chevalley_parity(p, i);
    let e = |i: usize| Graded::of(&rep.e[i % n], par(i));
    let f = |i: usize| Graded::of(&rep.f[i % n], par(i));
    let one = real(1.0);
    let qq = q - q.inv();

    for i in 0..n {
        let hi = rep.h_op(i);
        for j in 0..n {
            let hj = rep.h_op(j);
            let hh = graded_commutator(&hi, 0, &hj, 0, one)?;
            report.push(format!("h-h[{i},{j}]"), hh.max_abs());
            let a = real(cartan(p, i, j) as f64);
            let he = graded_commutator(&hi, 0, &rep.e[j], par(j), one)?;
            report.push(
                format!("h-e[{i},{j}]"),
                relative_residual(&he, &rep.e[j].scale(a), &[], None)?,
            );
            let hf = graded_commutator(&hi, 0, &rep.f[j], par(j), one)?;
            report.push(
                format!("h-f[{i},{j}]"),
                relative_residual(&hf, &rep.f[j].scale(-a), &[], None)?,
            );
            let ef = graded_commutator(&rep.e[i], par(i), &rep.f[j], par(j), one)?;
            let rhs = if i == j {
                rep.qpow_h(i, q, 1)
                    .sub(&rep.qpow_h(i, q, -1))?
                    .scale(qq.inv())
            } else {
                SparseOperator::zeros(ef.factors())
            };
            report.push(
                format!("e-f[{i},{j}]"),
                relative_residual(&ef, &rhs, &[], None)?,
            );
            if cartan(p, i, j) == 0 {
                report.push(
                    format!("com-ee[{i},{j}]"),
                    e(i).bracket(&e(j), one, None)?.vanishing_residual(None),
                );
                report.push(
                    format!("com-ff[{i},{j}]"),
                    f(i).bracket(&f(j), one, None)?.vanishing_residual(None),
                );
            }
            if i != j && cartan(p, i, j).abs() == 1 && cartan(p, i, i) != 0 {
                let x = e(i).bracket(&e(i).bracket(&e(j), q, None)?, q.inv(), None)?;
                report.push(format!("serre-e[{i},{j}]"), x.vanishing_residual(None));
                let x = f(i).bracket(&f(i).bracket(&f(j), q.inv(), None)?, q, None)?;
                report.push(format!("serre-f[{i},{j}]"), x.vanishing_residual(None));
            }
            if i != j && n == 2 && !p.is_super() {
                let q2 = q * q;
                let x = e(i).bracket(
                    &e(i).bracket(&e(i).bracket(&e(j), q2, None)?, one, None)?,
                    q2.inv(),
                    None,
                )?;
                report.push(
                    format!("serre-cubic-e[{i},{j}]"),
                    x.vanishing_residual(None),
                );
                let x = f(i).bracket(
                    &f(i).bracket(&f(i).bracket(&f(j), q2.inv(), None)?, one, None)?,
                    q2,
                    None,
                )?;
                report.push(
                    format!("serre-cubic-f[{i},{j}]"),
                    x.vanishing_residual(None),
                );
            }
        }
    }
    if n >= 4 && p.is_super() {
        for (i, j, k) in [(n - 1, 0, 1), (p.m - 1, p.m, p.m + 1)] {
            let x = e(i)
                .bracket(&e(j), q, None)?
                .bracket(&e(k), q.inv(), None)?
                .bracket(&e(j), one, None)?;
            report.push(
                format!("extra-serre-e[{i},{j},{k}]"),
                x.vanishing_residual(None),
            );
            let x = f(i)
                .bracket(&f(j), q.inv(), None)?
                .bracket(&f(k), q, None)?
                .bracket(&f(j), one, None)?;
            report.push(
                format!("extra-serre-f[{i},{j},{k}]"),
                x.vanishing_residual(None),
            );
        }
    }
    let quartic = match (p.m, p.n) {
        (2, 1) => Some((0, 2, 1)),
        (1, 2) => Some((0, 1, 2)),
        _ => None,
    };
    if let Some((a, b, c)) = quartic {
        for (tag, gens) in [("e", &rep.e), ("f", &rep.f)] {
            let g = |i: usize| Graded::of(&gens[i % n], par(i));
            let lhs = g(a).bracket(
                &g(b).bracket(
                    &g(a).bracket(&g(b).bracket(&g(c), q.inv(), None)?, one, None)?,
                    one,
                    None,
                )?,
                q,
                None,
            )?;
            let rhs = g(b).bracket(
                &g(a).bracket(
                    &g(b).bracket(&g(a).bracket(&g(c), q.inv(), None)?, one, None)?,
                    one,
                    None,
                )?,
                q,
                None,
            )?;
            report.push(format!("quartic-{tag}"), lhs.equality_residual(&rhs, None)?);
        }
    }
    let level: Vec<i64> = (0..n).map(|k| rep.h.iter().map(|h| h[k]).sum()).collect();
    report.push_exact(
        "level-zero",
        level.iter().map(|x| x.abs() as f64).fold(0.0, f64::max),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_linalg::c64;

    fn prof(m: usize, n: usize) -> ParityProfile {
        ParityProfile::new(m, n).unwrap()
    }

    #[test]
    fn one_zero_r_is_scalar_q() {
        let q = c64(0.4, 0.3);
        let (r, rb) = build_constant_r(prof(1, 0), q).unwrap();
        assert_eq!(r.to_dense(), vec![vec![q]]);
        assert!((rb.get(0, 0) - q.inv()).norm() < 1e-15);
    }

    #[test]
    fn two_zero_offdiagonal_coefficient() {
        let q = c64(0.6, 0.1);
        let (r, _) = build_constant_r(prof(2, 0), q).unwrap();
        // E_12⊗E_21 sits at row (1,2)→0*2+1=1, column (2,1)→1*2+0=2
        assert!((r.get(1, 2) - (q - q.inv())).norm() < 1e-15);
    }

    #[test]
    fn one_one_fermionic_diagonal() {
        let q = c64(0.6, 0.1);
        let (r, _) = build_constant_r(prof(1, 1), q).unwrap();
        assert!((r.get(3, 3) - q.inv()).norm() < 1e-15);
    }

    #[test]
    fn degenerate_q_rejected() {
        assert!(matches!(
            build_constant_r(prof(2, 0), real(1.0)),
            Err(RMatrixError::DegenerateQ(_))
        ));
    }

    #[test]
    fn ps_scalar_case() {
        let (q, x1, x2) = (c64(0.5, 0.2), c64(1.1, 0.3), c64(0.7, -0.4));
        let r = build_ps_rmatrix(prof(1, 0), q, x1, x2).unwrap();
        assert!((r.matrix.get(0, 0) - (q - x1 / x2 * q.inv())).norm() < 1e-14);
        let r0 = build_ps_rmatrix(prof(2, 1), q, real(0.0), x2).unwrap();
        let (c, _) = build_constant_r(prof(2, 1), q).unwrap();
        assert_eq!(crate::graded_linalg::residual(&r0.matrix, &c).unwrap(), 0.0);
        // E_11⊗E_22 sector
        let r = build_ps_rmatrix(prof(2, 0), q, x1, x2).unwrap();
        assert!((r.matrix.get(1, 1) - (1.0 - x1 / x2)).norm() < 1e-14);
        assert!(build_ps_rmatrix(prof(2, 0), q, x1, real(0.0)).is_err());
    }

    #[test]
    fn ybe_scalar_exact() {
        let r =
            check_graded_ybe(prof(1, 0), c64(0.5, 0.1), real(1.0), real(2.0), real(3.0)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn fundamental_examples() {
        let y = c64(1.3, 0.2);
        let rep = fundamental_rep(prof(2, 0), y).unwrap();
        let v = prof(2, 0).fundamental();
        assert_eq!(
            crate::graded_linalg::residual(&rep.e[0], &matrix_unit(&v, 2, 1).unwrap().scale(y))
                .unwrap(),
            0.0
        );
        assert_eq!(rep.h[1], vec![1, -1]);
        let rep = fundamental_rep(prof(1, 2), y).unwrap();
        let v = prof(1, 2).fundamental();
        assert_eq!(
            crate::graded_linalg::residual(&rep.f[1], &matrix_unit(&v, 2, 1).unwrap()).unwrap(),
            0.0
        );
        assert_eq!(
            fundamental_rep(prof(1, 1), y).unwrap_err(),
            RMatrixError::AffineOneOne
        );
    }

    #[test]
    fn cartan_affine_sl2() {
        let p = prof(2, 0);
        assert_eq!(cartan(p, 0, 1), -2);
        assert_eq!(cartan(p, 1, 1), 2);
        let p = prof(2, 1);
        assert_eq!(cartan(p, 2, 2), 0);
        assert_eq!(cartan(p, 0, 0), 0);
    }

    #[test]
    fn ybe_and_chevalley_across_profiles() {
        let q = c64(0.62, 0.27);
        let xs = [c64(0.9, 0.4), c64(-0.3, 1.2), c64(1.7, -0.5)];
        for (m, n) in [
            (2, 0),
            (0, 2),
            (1, 1),
            (3, 0),
            (2, 1),
            (1, 2),
            (0, 3),
            (2, 2),
            (3, 1),
            (1, 3),
        ] {
            let p = prof(m, n);
            let r = check_graded_ybe(p, q, xs[0], xs[1], xs[2]).unwrap();
            assert!(r < 1e-12, "ybe {p}: {r}");
            if (m, n) == (1, 1) {
                continue;
            }
            let rep = fundamental_rep(p, xs[1]).unwrap();
            let report = check_chevalley_relations(&rep, q).unwrap();
            assert!(report.passes(1e-12), "{p}: {:?}", report.failures(1e-12));
        }
    }
}
