//! Twisted traces: Baxter Q-operators over oscillator Fock spaces, the
//! fundamental transfer matrix, one-site closed forms, QQ-relations and
//! the character layer (Verma supercharacter, Schur/KR limit, Drinfeld
//! polynomials).

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::fock::{FockError, FockSpace, IndexSet, Statistics};
use crate::graded_linalg::{
    embed_factor, graded_kron, matrix_unit, real, GradedSpace, LinalgError, ParityProfile,
    SparseOperator, C64,
};
use crate::loperators::{build_l_pair, LOperatorError};
use crate::rmatrix::{build_constant_r, check_q, RMatrixError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TqError {
    #[error("twist value z_{0} must be non-zero")]
    ZeroTwist(usize),
    #[error("expected {expected} twist values, got {got}")]
    TwistLength { expected: usize, got: usize },
    #[error(
        "trace over mode ({i},{a}) does not converge: |z_a/z_i| = {modulus} is too close to 1"
    )]
    NonConvergent { i: usize, a: usize, modulus: f64 },
    #[error("inhomogeneity ξ_{0} must be non-zero")]
    ZeroInhomogeneity(usize),
    #[error("a lattice needs at least one site")]
    EmptyLattice,
    #[error("pole encountered in {0}")]
    Pole(&'static str),
    #[error("cutoff exhausted at {cutoff}: successive traces still differ by {change:e}")]
    CutoffExhausted { cutoff: usize, change: f64 },
    #[error("QQ-relations need i != j outside the base set, got i={i}, j={j}")]
    BadQqIndices { i: usize, j: usize },
    #[error("{0} requires M+N <= 3")]
    RankTooLarge(&'static str),
    #[error("the Kirillov-Reshetikhin limit needs N = 0")]
    NeedsBosonic,
    #[error("the limit needs |z_i| > |z_a| for i in I, a not in I")]
    OrderingViolated,
    #[error("λ_i − (−1)^(p(i)+p(i+1)) λ_(i+1) = {0} is not a non-negative integer")]
    NonIntegerDrinfeld(C64),
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("coincident twist values make the determinant vanish")]
    ZCollision,
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    LOperator(#[from] LOperatorError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
}

pub type Result<T> = std::result::Result<T, TqError>;

/// Twists at which a bosonic trace is considered too close to the unit circle.
pub const CONVERGENCE_MARGIN: f64 = 1e-3;

/// Twist values `z_1 … z_{M+N}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TwistParams {
    pub profile: ParityProfile,
    pub z: Vec<C64>,
}

impl TwistParams {
    pub fn new(profile: ParityProfile, z: Vec<C64>) -> Result<Self> {
        if z.len() != profile.rank() {
            return Err(TqError::TwistLength {
                expected: profile.rank(),
                got: z.len(),
            });
        }
        if let Some(k) = z.iter().position(|v| v.norm() == 0.0) {
            return Err(TqError::ZeroTwist(k + 1));
        }
        Ok(Self { profile, z })
    }

    /// `z_k = q^{φ_k}` (principal branch).
    pub fn from_exponents(profile: ParityProfile, q: C64, phi: &[C64]) -> Result<Self> {
        let lq = q.ln();
        Self::new(profile, phi.iter().map(|p| (p * lq).exp()).collect())
    }

    /// Random twists with widely separated moduli, suited to lattices of
    /// `sites` sites: `z_k = ρ^{π(k)} e^{iθ_k}` with `ρ = 0.3|q|^{sites+2}`
    /// and a random permutation `π`.
    pub fn random_separated<R: Rng>(
        profile: ParityProfile,
        q: C64,
        sites: usize,
        rng: &mut R,
    ) -> Self {
        let rho = 0.3 * q.norm().powi(sites as i32 + 2);
        let mut perm: Vec<usize> = (0..profile.rank()).collect();
        perm.shuffle(rng);
        let z = perm
            .iter()
            .map(|&k| {
                C64::from_polar(
                    rho.powi(k as i32),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { profile, z }
    }

    /// Ordered twists `z_k = r^{k−1} e^{i(k−1)θ}` with `0 < r < 1`.
    pub fn geometric(profile: ParityProfile, r: f64, theta: f64) -> Self {
        let z = (0..profile.rank())
            .map(|k| C64::from_polar(r.powi(k as i32), theta * k as f64))
            .collect();
        Self { profile, z }
    }

    /// `z_k` (1-based).
    pub fn get(&self, k: usize) -> C64 {
        self.z[k - 1]
    }

    /// `z_a / z_i`.
    pub fn ratio(&self, i: usize, a: usize) -> C64 {
        self.get(a) / self.get(i)
    }

    /// Checks the convergence predicate on the bosonic modes of `I × Ī` and
    /// returns the modes whose trace runs over the conjugate module
    /// (`|z_a/z_i| > 1`).
    pub fn conjugate_modes(&self, index_set: &IndexSet) -> Result<Vec<(usize, usize)>> {
        let p = self.profile;
        let mut out = Vec::new();
        for &i in index_set.members() {
            for a in index_set.complement() {
                if p.parity(i) != p.parity(a) {
                    continue;
                }
                let m = self.ratio(i, a).norm();
                if m.ln().abs() < CONVERGENCE_MARGIN {
                    return Err(TqError::NonConvergent { i, a, modulus: m });
                }
                if m > 1.0 {
                    out.push((i, a));
                }
            }
        }
        Ok(out)
    }

    /// True when every bosonic mode has `|z_a/z_i| < 1` (no conjugation needed).
    pub fn is_convergent(&self, index_set: &IndexSet) -> bool {
        matches!(self.conjugate_modes(index_set), Ok(v) if v.is_empty())
    }

    /// Twists shifted by the quantum-space state: `z_k q^{(−1)^{p(k)} #{l = k}}`.
    pub fn shifted(&self, q: C64, state: &[usize]) -> Vec<C64> {
        let p = self.profile;
        (1..=p.rank())
            .map(|k| {
                let cnt = state.iter().filter(|&&l| l == k).count() as i32;
                self.get(k) * q.powi(p.sign(k) * cnt)
            })
            .collect()
    }
}

/// Sites and inhomogeneities of the quantum space.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LatticeConfig {
    pub xi: Vec<C64>,
}

impl LatticeConfig {
    pub fn new(xi: Vec<C64>) -> Result<Self> {
        if xi.is_empty() {
            return Err(TqError::EmptyLattice);
        }
        if let Some(k) = xi.iter().position(|v| v.norm() == 0.0) {
            return Err(TqError::ZeroInhomogeneity(k + 1));
        }
        Ok(Self { xi })
    }

    pub fn sites(&self) -> usize {
        self.xi.len()
    }
}

/// Cutoff schedule for traces over bosonic modes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CutoffPolicy {
    pub start: usize,
    pub max: usize,
    /// Accept when traces at `c` and `c+3` differ by less than this (max-abs).
    pub tol: f64,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            start: 8,
            max: 48,
            tol: 1e-10,
        }
    }
}

/// `D_I = Π (z_a/z_i)^{n_ia}` on the Fock space; on a conjugate mode `n_ia`
/// takes the values `−n−1`.
pub fn boundary_operator_fock(space: &FockSpace, twist: &TwistParams) -> SparseOperator {
    boundary_with(space, &twist.z)
}

fn boundary_with(space: &FockSpace, z: &[C64]) -> SparseOperator {
    let modes = space.modes();
    let d: Vec<C64> = (0..space.dim())
        .map(|s| {
            modes
                .iter()
                .enumerate()
                .map(|(k, m)| (z[m.a - 1] / z[m.i - 1]).powi(space.number_value(s, k) as i32))
                .product()
        })
        .collect();
    SparseOperator::diagonal(&space.factors(), &d)
}

/// `Π_{i∈I, a∈Ī} (1 − z_a/z_i)^{−(−1)^{p(i)+p(a)}}`.
pub fn normalization_z(index_set: &IndexSet, twist: &TwistParams) -> Result<C64> {
    twist.conjugate_modes(index_set)?;
    Ok(normalization_product(index_set, &twist.z))
}

fn normalization_product(index_set: &IndexSet, z: &[C64]) -> C64 {
    let p = index_set.profile();
    let mut out = real(1.0);
    for &i in index_set.members() {
        for a in index_set.complement() {
            let f = 1.0 - z[a - 1] / z[i - 1];
            out *= if p.parity(i) == p.parity(a) {
                f.inv()
            } else {
                f
            };
        }
    }
    out
}

/// A truncated trace together with a bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TraceValue {
    pub value: C64,
    pub tail_bound: f64,
}

/// Supertrace of the boundary operator over the truncated Fock space. Each
/// conjugate bosonic mode contributes a factor −1 so that the result is the
/// analytic continuation of the normalization product.
pub fn normalization_z_trace(space: &FockSpace, twist: &TwistParams) -> Result<TraceValue> {
    let conj = twist.conjugate_modes(space.index_set())?;
    let mut fresh = FockSpace::new(space.index_set(), space.cutoff())?;
    fresh = fresh.with_conjugate_modes(&conj)?;
    let d = boundary_operator_fock(&fresh, twist);
    let sign = if conj.len() % 2 == 1 { -1.0 } else { 1.0 };
    let value = d.supertrace() * sign;
    // |Π a_k − Π b_k| ≤ Σ_k |a_k − b_k| Π_{j≠k} max(|a_j|,|b_j|)
    let c = space.cutoff() as i32;
    let mut caps = Vec::new();
    let mut tails = Vec::new();
    for m in fresh.modes() {
        let w = twist.ratio(m.i, m.a).norm();
        match m.statistics {
            Statistics::Fermionic => {
                caps.push(1.0 + w);
                tails.push(0.0);
            }
            Statistics::Bosonic => {
                let (u, pre) = if w > 1.0 {
                    (1.0 / w, 1.0 / w)
                } else {
                    (w, 1.0)
                };
                caps.push(pre / (1.0 - u));
                tails.push(pre * u.powi(c + 1) / (1.0 - u));
            }
        }
    }
    let tail_bound = (0..caps.len())
        .map(|k| {
            tails[k]
                * (0..caps.len())
                    .filter(|&j| j != k)
                    .map(|j| caps[j])
                    .product::<f64>()
        })
        .sum();
    Ok(TraceValue { value, tail_bound })
}

/// Basis state of `V^{⊗L}` as 1-based labels `(l_1 … l_L)` (row-major).
pub fn quantum_state(n: usize, sites: usize, index: usize) -> Vec<usize> {
    let mut out = vec![0; sites];
    let mut r = index;
    for s in (0..sites).rev() {
        out[s] = r % n + 1;
        r /= n;
    }
    out
}

/// A traced Q-operator with the cutoff it was accepted at.
#[derive(Debug, Clone)]
pub struct LatticeQ {
    pub matrix: SparseOperator,
    pub cutoff: usize,
    /// Max-abs change between the two last cutoffs (0 when there are no bosonic modes).
    pub change: f64,
}

/// `𝐙⁻¹ Str_F[L^{0L}(ξ_L/x) ⋯ L^{01}(ξ_1/x) (D_I ⊗ 1)]` at a fixed cutoff.
/// `𝐙` is diagonal on the quantum space: row `r` is divided by the truncated
/// trace of the boundary operator at the state-shifted twists.
pub fn lattice_q_fixed(
    index_set: &IndexSet,
    x: C64,
    config: &LatticeConfig,
    twist: &TwistParams,
    q: C64,
    cutoff: usize,
) -> Result<SparseOperator> {
    check_q(q)?;
    if x.norm() == 0.0 {
        return Err(TqError::Pole("lattice_q (x = 0)"));
    }
    let p = index_set.profile();
    let n = p.rank();
    let sites = config.sites();
    let conj = twist.conjugate_modes(index_set)?;
    let space = FockSpace::new(index_set, cutoff)?.with_conjugate_modes(&conj)?;
    let pair = build_l_pair(index_set, &space, q)?;
    let v = p.fundamental();
    let quantum: Vec<GradedSpace> = vec![v.clone(); sites];
    let fock_factors = space.factors();
    let mut tot = graded_kron(
        &boundary_operator_fock(&space, twist),
        &SparseOperator::identity(&quantum),
    )?;
    for (j, xi) in config.xi.iter().enumerate() {
        let arg = xi / x;
        let mut site = None::<SparseOperator>;
        for a in 1..=n {
            for b in 1..=n {
                let t = pair.entry(a, b, arg)?;
                if t.is_zero() {
                    continue;
                }
                let unit = embed_factor(&matrix_unit(&v, a, b)?, j, &quantum)?;
                let term = graded_kron(&t, &unit)?;
                site = Some(match site {
                    Some(s) => s.add(&term)?,
                    None => term,
                });
            }
        }
        tot = site.expect("diagonal entries never vanish").mul(&tot)?;
    }
    let traced = tot.partial_supertrace(fock_factors.len());
    let mut zdiag = Vec::with_capacity(traced.dim());
    for r in 0..traced.dim() {
        let zr = twist.shifted(q, &quantum_state(n, sites, r));
        let z = boundary_with(&space, &zr).supertrace();
        if z.norm() == 0.0 {
            return Err(TqError::Pole("lattice_q normalization"));
        }
        zdiag.push(z.inv());
    }
    Ok(SparseOperator::diagonal(&quantum, &zdiag).mul(&traced)?)
}

fn has_bosonic_modes(index_set: &IndexSet) -> bool {
    let p = index_set.profile();
    index_set.members().iter().any(|&i| {
        index_set
            .complement()
            .iter()
            .any(|&a| p.parity(i) == p.parity(a))
    })
}

/// Adaptive-cutoff Q-operator: traces at `c` and `c+3` must agree within
/// `policy.tol`, otherwise `c` doubles up to `policy.max`.
pub fn lattice_q(
    index_set: &IndexSet,
    x: C64,
    config: &LatticeConfig,
    twist: &TwistParams,
    q: C64,
    policy: &CutoffPolicy,
) -> Result<LatticeQ> {
    if !has_bosonic_modes(index_set) {
        let matrix = lattice_q_fixed(index_set, x, config, twist, q, 2)?;
        return Ok(LatticeQ {
            matrix,
            cutoff: 2,
            change: 0.0,
        });
    }
    let mut c = policy.start.max(2);
    loop {
        let a = lattice_q_fixed(index_set, x, config, twist, q, c)?;
        let b = lattice_q_fixed(index_set, x, config, twist, q, c + 3)?;
        let change = a.sub(&b)?.max_abs();
        if change < policy.tol {
            return Ok(LatticeQ {
                matrix: b,
                cutoff: c + 3,
                change,
            });
        }
        if 2 * c + 3 > policy.max {
            return Err(TqError::CutoffExhausted {
                cutoff: c + 3,
                change,
            });
        }
        c *= 2;
    }
}

fn row_product(
    p: ParityProfile,
    i: usize,
    others: impl Iterator<Item = usize>,
    zp: &[C64],
    q: C64,
) -> Result<C64> {
    let si = p.sign(i);
    let q2 = q.powi(2 * si);
    let mut prod = real(1.0);
    for b in others {
        let num = 1.0 - zp[b - 1] / zp[i - 1];
        let den = 1.0 - zp[b - 1] * q2 / zp[i - 1];
        if den.norm() < 1e-14 || num.norm() < 1e-14 {
            return Err(TqError::Pole("one-site product"));
        }
        let f = num / den;
        prod *= if p.parity(i) == p.parity(b) {
            f
        } else {
            f.inv()
        };
    }
    Ok(prod)
}

/// `z'_k = z_k q^{(−1)^{p(k)} δ_{ik}}`.
fn row_shifted(twist: &TwistParams, q: C64, i: usize) -> Vec<C64> {
    twist.shifted(q, &[i])
}

/// Diagonal of the one-site Q-operator.
pub fn one_site_q(
    index_set: &IndexSet,
    x: C64,
    xi: C64,
    twist: &TwistParams,
    q: C64,
) -> Result<Vec<C64>> {
    check_q(q)?;
    if xi.norm() == 0.0 {
        return Err(TqError::ZeroInhomogeneity(1));
    }
    let p = index_set.profile();
    let mut out = Vec::with_capacity(p.rank());
    for i in p.indices() {
        if index_set.contains(i) {
            let zp = row_shifted(twist, q, i);
            let prod = row_product(p, i, index_set.complement().into_iter(), &zp, q)?;
            out.push(1.0 - x / xi * prod);
        } else {
            out.push(real(1.0));
        }
    }
    Ok(out)
}

fn cpow(z: C64, w: C64) -> C64 {
    (w * z.ln()).exp()
}

/// The spectral shift `q^{−2((−1)^{p(i)} λ_i − Σ_{k<i} (−1)^{p(k)})}`.
fn verma_shift(p: ParityProfile, lambda: &[C64], i: usize, q: C64) -> C64 {
    let below: i32 = (1..i).map(|k| p.sign(k)).sum();
    let e = lambda[i - 1] * p.sign(i) as f64 - below as f64;
    cpow(q, e * -2.0)
}

/// Diagonal of the one-site T-operator for the Verma module of weight `λ`.
pub fn one_site_t_verma(
    lambda: &[C64],
    x: C64,
    xi: C64,
    twist: &TwistParams,
    q: C64,
) -> Result<Vec<C64>> {
    check_q(q)?;
    let p = twist.profile;
    if lambda.len() != p.rank() {
        return Err(TqError::TwistLength {
            expected: p.rank(),
            got: lambda.len(),
        });
    }
    if xi.norm() == 0.0 {
        return Err(TqError::ZeroInhomogeneity(1));
    }
    let zplus = verma_supercharacter(lambda, twist)?;
    let mut out = Vec::new();
    for i in p.indices() {
        let zp = row_shifted(twist, q, i);
        let prod = row_product(p, i, p.indices().filter(|&b| b != i), &zp, q)?;
        out.push(zplus * (1.0 - x / xi * verma_shift(p, lambda, i, q) * prod));
    }
    Ok(out)
}

/// Relative residual of the Verma factorization into one-site Q-operators of
/// the singletons `{j}` at shifted spectral parameters.
pub fn check_verma_factorization(
    lambda: &[C64],
    x: C64,
    xi: C64,
    twist: &TwistParams,
    q: C64,
) -> Result<f64> {
    let p = twist.profile;
    let t = one_site_t_verma(lambda, x, xi, twist, q)?;
    let zplus = verma_supercharacter(lambda, twist)?;
    let mut rhs = vec![zplus; p.rank()];
    for j in p.indices() {
        let iset = IndexSet::new(p, &[j])?;
        let qj = one_site_q(&iset, x * verma_shift(p, lambda, j, q), xi, twist, q)?;
        for (r, v) in rhs.iter_mut().zip(qj) {
            *r *= v;
        }
    }
    let scale = t.iter().chain(&rhs).map(|v| v.norm()).fold(1.0, f64::max);
    Ok(t.iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale)
}

/// `Str_0[R^{0L}(x,ξ_L) ⋯ R^{01}(x,ξ_1) (D ⊗ 1)]` with `D = diag(z)` on the
/// auxiliary fundamental space.
pub fn lattice_t_fundamental(
    x: C64,
    config: &LatticeConfig,
    twist: &TwistParams,
    q: C64,
) -> Result<SparseOperator> {
    let p = twist.profile;
    let n = p.rank();
    let v = p.fundamental();
    let (r, rb) = build_constant_r(p, q)?;
    // R = Σ_ab A_ab ⊗ E_ab with A_ab on the auxiliary space
    let block = |m: &SparseOperator, a: usize, b: usize| {
        let mut trip = Vec::new();
        for rr in 0..n {
            for cc in 0..n {
                let val = m.get(rr * n + a - 1, cc * n + b - 1);
                if val.norm() != 0.0 {
                    let odd = (p.parity(a) + p.parity(b)) * p.parity(cc + 1) % 2 == 1;
                    trip.push((rr, cc, if odd { -val } else { val }));
                }
            }
        }
        SparseOperator::from_triplets(std::slice::from_ref(&v), trip)
    };
    let sites = config.sites();
    let quantum: Vec<GradedSpace> = vec![v.clone(); sites];
    let dz = SparseOperator::diagonal(std::slice::from_ref(&v), &twist.z);
    let mut tot = graded_kron(&dz, &SparseOperator::identity(&quantum))?;
    for (j, xi) in config.xi.iter().enumerate() {
        let ratio = x / xi;
        let mut site = None::<SparseOperator>;
        for a in 1..=n {
            for b in 1..=n {
                let t = SparseOperator::linear_combination(&[
                    (real(1.0), &block(&r, a, b)),
                    (-ratio, &block(&rb, a, b)),
                ])?;
                if t.is_zero() {
                    continue;
                }
                let term = graded_kron(&t, &embed_factor(&matrix_unit(&v, a, b)?, j, &quantum)?)?;
                site = Some(match site {
                    Some(s) => s.add(&term)?,
                    None => term,
                });
            }
        }
        tot = site.expect("R has a diagonal").mul(&tot)?;
    }
    Ok(tot.partial_supertrace(1))
}

/// `max|AB − BA| / max(1, max|AB|)`.
pub fn commutator_residual(a: &SparseOperator, b: &SparseOperator) -> Result<f64> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    Ok(ab.sub(&ba)?.max_abs() / ab.max_abs().max(1.0))
}

/// Which functional relation applies to a pair `(i,j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum QqKind {
    /// `p(i) = p(j)`
    SameParity,
    /// `p(i) ≠ p(j)`
    MixedParity,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct QqOutcome {
    pub kind: QqKind,
    pub residual: f64,
    /// The relation is proven (rather than expected) for this profile.
    pub proven: bool,
    /// Largest trace cutoff used (0 for closed forms).
    pub cutoff: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct QqOptions {
    /// Use the shift convention obtained by `q → q⁻¹` in the spectral shifts.
    pub inverted_shift: bool,
    pub cutoff: CutoffPolicy,
}

/// Profiles for which the QQ-relations are proven rather than expected.
pub fn qq_proven(p: ParityProfile) -> bool {
    matches!((p.m, p.n), (2, 0) | (3, 0) | (2, 1))
}

/// Residual of the QQ-relation for `(I, i, j)`. Q-operators come from the
/// one-site closed form for one site and from adaptive traces otherwise.
#[allow(clippy::too_many_arguments)]
pub fn check_qq_relations(
    profile: ParityProfile,
    base: &[usize],
    i: usize,
    j: usize,
    x: C64,
    twist: &TwistParams,
    config: &LatticeConfig,
    q: C64,
    opts: &QqOptions,
) -> Result<QqOutcome> {
    let n = profile.rank();
    if n > 3 {
        return Err(TqError::RankTooLarge("check_qq_relations"));
    }
    if i == j || base.contains(&i) || base.contains(&j) || i == 0 || j == 0 || i > n || j > n {
        return Err(TqError::BadQqIndices { i, j });
    }
    let sites = config.sites();
    let mut cutoff = 0;
    let mut qf = |members: &[usize], xx: C64| -> Result<SparseOperator> {
        let iset = IndexSet::new(profile, members)?;
        if sites == 1 {
            let d = one_site_q(&iset, xx, config.xi[0], twist, q)?;
            Ok(SparseOperator::diagonal(&[profile.fundamental()], &d))
        } else {
            let lq = lattice_q(&iset, xx, config, twist, q, &opts.cutoff)?;
            cutoff = cutoff.max(lq.cutoff);
            Ok(lq.matrix)
        }
    };
    let pi = profile.parity(i) as i32;
    let (mut a, mut b) = (q.powi(1 - 2 * pi), q.powi(-1 + 2 * pi));
    if opts.inverted_shift {
        std::mem::swap(&mut a, &mut b);
    }
    let with = |extra: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = base.iter().chain(extra).copied().collect();
        v.sort_unstable();
        v
    };
    let quantum = vec![profile.fundamental(); sites];
    let zdiag = |k: usize| {
        let d: Vec<C64> = (0..n.pow(sites as u32))
            .map(|r| twist.shifted(q, &quantum_state(n, sites, r))[k - 1])
            .collect();
        SparseOperator::diagonal(&quantum, &d)
    };
    let (zi, zj) = (zdiag(i), zdiag(j));
    let kind = if profile.parity(i) == profile.parity(j) {
        QqKind::SameParity
    } else {
        QqKind::MixedParity
    };
    let (i0, ii, ij, iij) = (with(&[]), with(&[i]), with(&[j]), with(&[i, j]));
    let (lhs, t1, t2) = match kind {
        QqKind::SameParity => {
            let lhs = zi.sub(&zj)?.mul(&qf(&i0, x * a)?)?.mul(&qf(&iij, x * b)?)?;
            let t1 = zi.mul(&qf(&ii, x * b)?)?.mul(&qf(&ij, x * a)?)?;
            let t2 = zj.mul(&qf(&ii, x * a)?)?.mul(&qf(&ij, x * b)?)?;
            (lhs, t1, t2)
        }
        QqKind::MixedParity => {
            let lhs = zi.sub(&zj)?.mul(&qf(&ii, x * b)?)?.mul(&qf(&ij, x * a)?)?;
            let t1 = zi.mul(&qf(&i0, x * a)?)?.mul(&qf(&iij, x * b)?)?;
            let t2 = zj.mul(&qf(&i0, x * b)?)?.mul(&qf(&iij, x * a)?)?;
            (lhs, t1, t2)
        }
    };
    let r = lhs.sub(&t1)?.add(&t2)?.max_abs();
    let scale = [lhs.max_abs(), t1.max_abs(), t2.max_abs()]
        .into_iter()
        .fold(1.0, f64::max);
    Ok(QqOutcome {
        kind,
        residual: r / scale,
        proven: qq_proven(profile),
        cutoff,
    })
}

/// The superdenominator `Π_{b<b'}(z_b − z_b') Π_{f<f'}(z_f' − z_f) / Π_{b,f}(z_b − z_f)`.
pub fn superdenominator(twist: &TwistParams) -> C64 {
    let p = twist.profile;
    let z = |k: usize| twist.get(k);
    let (m, n) = (p.m, p.rank());
    let mut num = real(1.0);
    for b in 1..=m {
        for bb in b + 1..=m {
            num *= z(b) - z(bb);
        }
    }
    for f in m + 1..=n {
        for ff in f + 1..=n {
            num *= z(ff) - z(f);
        }
    }
    let mut den = real(1.0);
    for b in 1..=m {
        for f in m + 1..=n {
            den *= z(b) - z(f);
        }
    }
    num / den
}

/// Closed form of the Verma supercharacter,
/// `(−1)^{N(N−1)/2} Π_{b≤M} z_b^{λ_b+M−N−b} Π_{f>M} z_f^{λ_f+M+N−f} / D`,
/// with principal-branch powers.
pub fn verma_supercharacter(lambda: &[C64], twist: &TwistParams) -> Result<C64> {
    let p = twist.profile;
    if lambda.len() != p.rank() {
        return Err(TqError::TwistLength {
            expected: p.rank(),
            got: lambda.len(),
        });
    }
    let d = superdenominator(twist);
    if d.norm() < 1e-300 || !d.is_finite() {
        return Err(TqError::ZCollision);
    }
    let (m, nn) = (p.m as i64, p.n as i64);
    let mut num = if (nn * (nn - 1) / 2) % 2 == 1 {
        real(-1.0)
    } else {
        real(1.0)
    };
    for k in p.indices() {
        let shift = if k <= p.m {
            m - nn - k as i64
        } else {
            m + nn - k as i64
        };
        num *= cpow(twist.get(k), lambda[k - 1]) * twist.get(k).powi(shift as i32);
    }
    Ok(num / d)
}

/// Coefficients `c_0 … c_cap` of the PBW expansion of the normalized Verma
/// supercharacter `Z⁺/Π z^λ`, graded by root height: every lowering root
/// `E_{ji}` (`i<j`) contributes `z_j/z_i` at height `j−i`; even roots any number
/// of times, odd roots at most once with a sign.
pub fn verma_series_coefficients(twist: &TwistParams, degree_cap: usize) -> Vec<C64> {
    let p = twist.profile;
    let mut poly = vec![real(0.0); degree_cap + 1];
    poly[0] = real(1.0);
    for i in p.indices() {
        for j in i + 1..=p.rank() {
            let u = twist.get(j) / twist.get(i);
            let h = j - i;
            if h > degree_cap {
                continue;
            }
            if p.parity(i) == p.parity(j) {
                // multiply by 1/(1 − u t^h) = Σ_k u^k t^{kh}
                for d in h..=degree_cap {
                    let add = poly[d - h] * u;
                    poly[d] += add;
                }
            } else {
                // multiply by (1 − u t^h)
                for d in (h..=degree_cap).rev() {
                    let sub = poly[d - h] * u;
                    poly[d] -= sub;
                }
            }
        }
    }
    poly
}

/// The PBW series truncated at total root height `degree_cap`.
pub fn verma_character_series(
    lambda: &[C64],
    twist: &TwistParams,
    degree_cap: usize,
) -> Result<C64> {
    let p = twist.profile;
    if lambda.len() != p.rank() {
        return Err(TqError::TwistLength {
            expected: p.rank(),
            got: lambda.len(),
        });
    }
    for i in p.indices() {
        for j in i + 1..=p.rank() {
            if p.parity(i) == p.parity(j) && (twist.get(j) / twist.get(i)).norm() >= 1.0 {
                return Err(TqError::NonConvergent {
                    i,
                    a: j,
                    modulus: (twist.get(j) / twist.get(i)).norm(),
                });
            }
        }
    }
    let lead: C64 = p
        .indices()
        .map(|k| cpow(twist.get(k), lambda[k - 1]))
        .product();
    Ok(lead
        * verma_series_coefficients(twist, degree_cap)
            .iter()
            .sum::<C64>())
}

/// Height coefficients of the closed form, extracted by a discrete Cauchy
/// integral of `t ↦ Z⁺(z_k t^k)/Π (z_k t^k)^{λ_k}` on a circle inside the
/// first pole.
pub fn closed_form_height_coefficients(
    twist: &TwistParams,
    degree_cap: usize,
    points: usize,
) -> Result<Vec<C64>> {
    let p = twist.profile;
    let n = p.rank();
    let mut radius: f64 = 1.0;
    for i in 1..=n {
        for j in i + 1..=n {
            let r = (twist.get(i) / twist.get(j))
                .norm()
                .powf(1.0 / (j - i) as f64);
            radius = radius.min(r);
        }
    }
    let radius = 0.5 * radius;
    let zero = vec![real(0.0); n];
    let mut coeffs = vec![real(0.0); degree_cap + 1];
    for s in 0..points {
        let t = C64::from_polar(radius, std::f64::consts::TAU * s as f64 / points as f64);
        let zt: Vec<C64> = (1..=n).map(|k| twist.get(k) * t.powi(k as i32)).collect();
        let tw = TwistParams::new(p, zt)?;
        let val = verma_supercharacter(&zero, &tw)?;
        for (d, c) in coeffs.iter_mut().enumerate() {
            *c += val * t.powi(-(d as i32)) / points as f64;
        }
    }
    Ok(coeffs)
}

/// Schur function by the bialternant formula `det(z_i^{M+λ_j−j}) / det(z_i^{M−j})`.
pub fn schur_function(lambda: &[usize], z: &[C64]) -> Result<C64> {
    let m = z.len();
    if lambda.len() > m {
        return Err(TqError::IndexOutOfRange(lambda.len()));
    }
    let lam = |j: usize| lambda.get(j).copied().unwrap_or(0);
    let num = DMatrix::from_fn(m, m, |i, j| z[i].powi((m + lam(j) - j - 1) as i32));
    let den = DMatrix::from_fn(m, m, |i, j| z[i].powi((m - j - 1) as i32));
    let d = den.determinant();
    if d.norm() < 1e-300 {
        return Err(TqError::ZCollision);
    }
    Ok(num.determinant() / d)
}

/// One row of the Kirillov–Reshetikhin convergence table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KrRow {
    pub m: usize,
    pub value: C64,
    pub error: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct KrTable {
    pub target: C64,
    pub rows: Vec<KrRow>,
    /// `max |z_a/z_i|`, the predicted error ratio between consecutive `m`.
    pub predicted_ratio: f64,
}

impl KrTable {
    /// `error(m+1)/error(m)` for consecutive rows.
    pub fn observed_ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].error / w[0].error)
            .collect()
    }
}

/// Normalized Schur functions `S_λ(z)/Π z_k^{λ_k}` with `λ_k = m θ(k ∈ I)`,
/// approaching the normalization `Z_I` as `m` grows.
pub fn check_kr_limit(
    index_set: &IndexSet,
    twist: &TwistParams,
    m_list: &[usize],
) -> Result<KrTable> {
    let p = index_set.profile();
    if p.n != 0 {
        return Err(TqError::NeedsBosonic);
    }
    let mut predicted: f64 = 0.0;
    for &i in index_set.members() {
        for a in index_set.complement() {
            let w = twist.ratio(i, a).norm();
            if w >= 1.0 {
                return Err(TqError::OrderingViolated);
            }
            predicted = predicted.max(w);
        }
    }
    let target = normalization_z(index_set, twist)?;
    let mut rows = Vec::new();
    for &m in m_list {
        // the character is symmetric, so the weight is sorted into a partition
        let part = vec![m; index_set.len()];
        let s = schur_function(&part, &twist.z)?;
        let norm: C64 = index_set
            .members()
            .iter()
            .map(|&k| twist.get(k).powi(m as i32))
            .product();
        let value = s / norm;
        rows.push(KrRow {
            m,
            value,
            error: (value - target).norm(),
        });
    }
    Ok(KrTable {
        target,
        rows,
        predicted_ratio: predicted,
    })
}

/// Coefficients (ascending in `x`) of
/// `Π_{k=1}^{d} (1 − x q^{−2(−1)^{p(i+1)} λ_{i+1} − 2(−1)^{p(i)}(k−1)})`
/// with `d = λ_i − (−1)^{p(i)+p(i+1)} λ_{i+1}`.
pub fn drinfeld_polynomial(
    lambda: &[C64],
    i: usize,
    profile: ParityProfile,
    q: C64,
) -> Result<Vec<C64>> {
    let n = profile.rank();
    if i == 0 || i >= n || lambda.len() != n {
        return Err(TqError::IndexOutOfRange(i));
    }
    let sign_pair = if profile.parity(i) == profile.parity(i + 1) {
        1.0
    } else {
        -1.0
    };
    let d = lambda[i - 1] - lambda[i] * sign_pair;
    let rounded = d.re.round();
    if d.im.abs() > 1e-12 || (d.re - rounded).abs() > 1e-12 || rounded < 0.0 {
        return Err(TqError::NonIntegerDrinfeld(d));
    }
    let deg = rounded as usize;
    let (si, si1) = (profile.sign(i) as f64, profile.sign(i + 1) as f64);
    let mut poly = vec![real(1.0)];
    for k in 1..=deg {
        let root_inv = cpow(q, lambda[i] * (-2.0 * si1) - 2.0 * si * (k - 1) as f64);
        let mut next = vec![real(0.0); poly.len() + 1];
        for (e, c) in poly.iter().enumerate() {
            next[e] += c;
            next[e + 1] -= c * root_inv;
        }
        poly = next;
    }
    Ok(poly)
}

/// Evaluates a polynomial given by ascending coefficients.
pub fn poly_eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(real(0.0), |acc, c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_linalg::c64;

    fn prof(m: usize, n: usize) -> ParityProfile {
        ParityProfile::new(m, n).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let p = prof(2, 0);
        let tw = TwistParams::new(p, vec![real(1.0), real(0.125)]).unwrap();
        let z = normalization_z(&IndexSet::new(p, &[1]).unwrap(), &tw).unwrap();
        assert!((z - 8.0 / 7.0).norm() < 1e-15);
        assert_eq!(normalization_z(&IndexSet::full(p), &tw).unwrap(), real(1.0));
        assert_eq!(
            normalization_z(&IndexSet::empty(p), &tw).unwrap(),
            real(1.0)
        );
        let p = prof(1, 1);
        let tw = TwistParams::new(p, vec![real(1.0), c64(0.3, 0.2)]).unwrap();
        let z = normalization_z(&IndexSet::new(p, &[1]).unwrap(), &tw).unwrap();
        assert!((z - (1.0 - c64(0.3, 0.2))).norm() < 1e-15);
    }

    #[test]
    fn trace_matches_geometric_series() {
        let p = prof(2, 0);
        let iset = IndexSet::new(p, &[1]).unwrap();
        let tw = TwistParams::new(p, vec![real(1.0), real(0.125)]).unwrap();
        let space = FockSpace::new(&iset, 12).unwrap();
        let t = normalization_z_trace(&space, &tw).unwrap();
        assert!((t.value - 8.0 / 7.0).norm() < 1e-10);
        assert!(t.tail_bound >= (t.value - 8.0 / 7.0).norm());
    }

    #[test]
    fn boundary_single_mode() {
        let p = prof(2, 0);
        let iset = IndexSet::new(p, &[1]).unwrap();
        let w = c64(0.2, 0.1);
        let tw = TwistParams::new(p, vec![real(1.0), w]).unwrap();
        let d = boundary_operator_fock(&FockSpace::new(&iset, 3).unwrap(), &tw);
        for k in 0..4 {
            assert!((d.get(k, k) - w.powi(k as i32)).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_ratio_rejected() {
        let p = prof(2, 0);
        let tw = TwistParams::new(p, vec![real(1.0), c64(0.0, 1.0)]).unwrap();
        let err = normalization_z(&IndexSet::new(p, &[1]).unwrap(), &tw).unwrap_err();
        assert!(matches!(err, TqError::NonConvergent { .. }));
    }

    #[test]
    fn one_site_trivial_cases() {
        let q = c64(0.5, 0.3);
        let (x, xi) = (c64(0.7, 0.2), c64(1.1, -0.3));
        let p = prof(1, 0);
        let tw = TwistParams::new(p, vec![real(1.0)]).unwrap();
        let d = one_site_q(&IndexSet::full(p), x, xi, &tw, q).unwrap();
        assert!((d[0] - (1.0 - x / xi)).norm() < 1e-15);
        let p = prof(2, 1);
        let tw = TwistParams::new(p, vec![real(1.0), c64(0.1, 0.0), c64(0.01, 0.02)]).unwrap();
        let d = one_site_q(&IndexSet::new(p, &[2]).unwrap(), real(0.0), xi, &tw, q).unwrap();
        assert!(d.iter().all(|v| (v - 1.0).norm() == 0.0));
    }

    #[test]
    fn verma_examples() {
        let tw = TwistParams::new(prof(1, 0), vec![c64(0.7, 0.2)]).unwrap();
        let lam = [c64(1.3, 0.4)];
        let z = verma_supercharacter(&lam, &tw).unwrap();
        assert!((z - cpow(c64(0.7, 0.2), lam[0])).norm() < 1e-14);
        let (z1, z2) = (c64(0.9, 0.1), c64(0.2, -0.3));
        let tw = TwistParams::new(prof(2, 0), vec![z1, z2]).unwrap();
        let lam = [real(2.0), real(1.0)];
        let z = verma_supercharacter(&lam, &tw).unwrap();
        assert!((z - z1.powi(3) * z2 / (z1 - z2)).norm() < 1e-13);
    }

    #[test]
    fn series_one_one_has_two_terms() {
        let tw = TwistParams::new(prof(1, 1), vec![c64(0.9, 0.1), c64(0.2, -0.3)]).unwrap();
        let c = verma_series_coefficients(&tw, 8);
        assert_eq!(c.iter().filter(|v| v.norm() > 0.0).count(), 2);
    }

    #[test]
    fn schur_examples() {
        let z = [c64(0.9, 0.1), c64(0.2, -0.3)];
        assert!((schur_function(&[1, 0], &z).unwrap() - (z[0] + z[1])).norm() < 1e-14);
        let want = z[0] * z[0] + z[0] * z[1] + z[1] * z[1];
        assert!((schur_function(&[2, 0], &z).unwrap() - want).norm() < 1e-14);
        assert!((schur_function(&[], &z).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn drinfeld_examples() {
        let p = prof(2, 0);
        let q = c64(0.5, 0.2);
        assert_eq!(
            drinfeld_polynomial(&[real(1.0), real(1.0)], 1, p, q).unwrap(),
            vec![real(1.0)]
        );
        let c = drinfeld_polynomial(&[real(1.0), real(0.0)], 1, p, q).unwrap();
        assert!((c[0] - 1.0).norm() < 1e-15 && (c[1] + 1.0).norm() < 1e-15);
        let c = drinfeld_polynomial(&[real(4.0), real(1.0)], 1, p, q).unwrap();
        assert_eq!(c.len(), 4);
        assert!(drinfeld_polynomial(&[real(0.5), real(0.0)], 1, p, q).is_err());
    }

    #[test]
    fn quantum_state_row_major() {
        assert_eq!(quantum_state(3, 2, 0), vec![1, 1]);
        assert_eq!(quantum_state(3, 2, 5), vec![2, 3]);
    }
}
