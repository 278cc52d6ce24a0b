//! Truncated Fock spaces and the q-oscillator superalgebra.
//!
//! For an index set `I ⊂ {1..M+N}` the oscillators are labelled by modes
//! `(i,a) ∈ I × Ī`, ordered lexicographically. A mode is bosonic when
//! `p(i)+p(a)` is even (occupancies `0..=cutoff`) and fermionic otherwise
//! (occupancies `0,1`, the occupied state being odd). Multi-mode generators
//! are graded embeddings of single-mode matrices, so anticommutation of odd
//! generators on different modes comes out of the Koszul signs.
//!
//! A bosonic mode may also be realised on the *conjugate* module: the raw
//! truncated Fock space with the generators transported by the discrete
//! automorphism `n ↦ −n−1, c ↦ c†, c† ↦ −c`. Traces over the conjugate
//! module converge in the opposite twist regime.

use std::fmt;

use thiserror::Error;

use crate::graded_linalg::{
    embed_factor, graded_commutator, real, relative_residual, GradedSpace, LinalgError,
    ParityProfile, RelationReport, SparseOperator, C64,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("index {index} is outside 1..={rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("bosonic cutoff must be at least 2 (got {0})")]
    CutoffTooSmall(usize),
    #[error("mode ({i},{a}) is not part of this Fock space")]
    UnknownMode { i: usize, a: usize },
    #[error("only bosonic modes can be realised on the conjugate module; ({i},{a}) is fermionic")]
    ConjugateFermion { i: usize, a: usize },
    #[error("automorphism parameter xi for mode ({i},{a}) is zero")]
    ZeroXi { i: usize, a: usize },
    #[error("automorphism parameters must cover {expected} modes (got {got})")]
    ParameterShape { expected: usize, got: usize },
    #[error("eta must be symmetric in its two mode labels")]
    EtaNotSymmetric,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, FockError>;

/// `[x]_q = (q^x − q^{−x}) / (q − q^{−1})`.
pub fn qnum(q: C64, x: i64) -> C64 {
    (q.powi(x as i32) - q.powi(-x as i32)) / (q - q.inv())
}

/// A subset `I` of `{1..M+N}` together with its profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    profile: ParityProfile,
    members: Vec<usize>,
}

/// The shapes for which explicit oscillator L-operators exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum IndexSetShape {
    Empty,
    Single(usize),
    CoSingle(usize),
    Full,
    Intermediate,
}

impl IndexSet {
    pub fn new(profile: ParityProfile, members: &[usize]) -> Result<Self> {
        let mut m: Vec<usize> = members.to_vec();
        for &k in &m {
            if k == 0 || k > profile.rank() {
                return Err(FockError::IndexOutOfRange {
                    index: k,
                    rank: profile.rank(),
                });
            }
        }
        m.sort_unstable();
        m.dedup();
        Ok(Self {
            profile,
            members: m,
        })
    }

    pub fn empty(profile: ParityProfile) -> Self {
        Self {
            profile,
            members: Vec::new(),
        }
    }

    pub fn full(profile: ParityProfile) -> Self {
        Self {
            profile,
            members: profile.indices().collect(),
        }
    }

    pub fn profile(&self) -> ParityProfile {
        self.profile
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&self.profile.cyclic(k)).is_ok()
    }

    pub fn complement(&self) -> Vec<usize> {
        self.profile
            .indices()
            .filter(|k| !self.contains(*k))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self, extra: &[usize]) -> Result<Self> {
        let all: Vec<usize> = self.members.iter().chain(extra).copied().collect();
        Self::new(self.profile, &all)
    }

    pub fn shape(&self) -> IndexSetShape {
        let r = self.profile.rank();
        match self.members.len() {
            0 => IndexSetShape::Empty,
            k if k == r => IndexSetShape::Full,
            1 => IndexSetShape::Single(self.members[0]),
            k if k + 1 == r => IndexSetShape::CoSingle(self.complement()[0]),
            _ => IndexSetShape::Intermediate,
        }
    }

    /// Every index set with an explicit oscillator solution, each listed once.
    pub fn all_supported(profile: ParityProfile) -> Vec<IndexSet> {
        let r = profile.rank();
        let mut out = vec![Self::empty(profile)];
        for i in 1..=r {
            out.push(Self {
                profile,
                members: vec![i],
            });
        }
        for a in 1..=r {
            out.push(Self {
                profile,
                members: (1..=r).filter(|&k| k != a).collect(),
            });
        }
        out.push(Self::full(profile));
        let mut seen: Vec<IndexSet> = Vec::new();
        for s in out {
            if !seen.contains(&s) {
                seen.push(s);
            }
        }
        seen
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.members.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", inner.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

/// The oscillator mode `(i,a)`, `i ∈ I`, `a ∈ Ī`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct FockMode {
    pub i: usize,
    pub a: usize,
    pub statistics: Statistics,
}

impl FockMode {
    pub fn parity(&self) -> u8 {
        match self.statistics {
            Statistics::Bosonic => 0,
            Statistics::Fermionic => 1,
        }
    }
}

/// Truncated multi-mode Fock space for the modes `I × Ī`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace {
    index_set: IndexSet,
    modes: Vec<FockMode>,
    cutoff: usize,
    conjugate: Vec<bool>,
    factors: Vec<GradedSpace>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    pub fn new(index_set: &IndexSet, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(FockError::CutoffTooSmall(cutoff));
        }
        let p = index_set.profile();
        let mut modes = Vec::new();
        for &i in index_set.members() {
            for a in index_set.complement() {
                let statistics = if p.parity(i) == p.parity(a) {
                    Statistics::Bosonic
                } else {
                    Statistics::Fermionic
                };
                modes.push(FockMode { i, a, statistics });
            }
        }
        let factors: Vec<GradedSpace> = modes
            .iter()
            .map(|m| match m.statistics {
                Statistics::Bosonic => GradedSpace::even(cutoff + 1),
                Statistics::Fermionic => GradedSpace::new(vec![0, 1]),
            })
            .collect();
        let mut strides = vec![1; modes.len()];
        for k in (0..modes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * factors[k + 1].dim();
        }
        let dim = factors.iter().map(|f| f.dim()).product();
        let conjugate = vec![false; modes.len()];
        Ok(Self {
            index_set: index_set.clone(),
            modes,
            cutoff,
            conjugate,
            factors,
            strides,
            dim,
        })
    }

    /// Realises the listed bosonic modes on the conjugate module.
    pub fn with_conjugate_modes(mut self, modes: &[(usize, usize)]) -> Result<Self> {
        for &(i, a) in modes {
            let k = self.mode_index(i, a)?;
            if self.modes[k].statistics == Statistics::Fermionic {
                return Err(FockError::ConjugateFermion { i, a });
            }
            self.conjugate[k] = true;
        }
        Ok(self)
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn profile(&self) -> ParityProfile {
        self.index_set.profile()
    }

    pub fn modes(&self) -> &[FockMode] {
        &self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tensor factors (one per mode, in mode order). An empty mode list
    /// (I = ∅ or I full) gives the one-dimensional space.
    pub fn factors(&self) -> Vec<GradedSpace> {
        if self.factors.is_empty() {
            vec![GradedSpace::even(1)]
        } else {
            self.factors.clone()
        }
    }

    pub fn is_conjugate(&self, mode: usize) -> bool {
        self.conjugate[mode]
    }

    pub fn conjugate_flags(&self) -> &[bool] {
        &self.conjugate
    }

    pub fn mode_index(&self, i: usize, a: usize) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.i == i && m.a == a)
            .ok_or(FockError::UnknownMode { i, a })
    }

    /// Raw occupancy of `mode` in basis state `state`.
    pub fn occupancy(&self, state: usize, mode: usize) -> usize {
        (state / self.strides[mode]) % self.factors[mode].dim()
    }

    pub fn occupancies(&self, state: usize) -> Vec<usize> {
        (0..self.modes.len())
            .map(|k| self.occupancy(state, k))
            .collect()
    }

    pub fn state_index(&self, occ: &[usize]) -> usize {
        occ.iter().zip(&self.strides).map(|(n, s)| n * s).sum()
    }

    pub fn basis_parity(&self, state: usize) -> u8 {
        let mut p = 0;
        for (k, m) in self.modes.iter().enumerate() {
            if m.statistics == Statistics::Fermionic {
                p += self.occupancy(state, k) as u8;
            }
        }
        p % 2
    }

    /// Eigenvalue of the algebra's number operator `n_{ia}`: the raw occupancy,
    /// or `−n−1` on a conjugate mode.
    pub fn number_value(&self, state: usize, mode: usize) -> i64 {
        let n = self.occupancy(state, mode) as i64;
        if self.conjugate[mode] {
            -n - 1
        } else {
            n
        }
    }

    /// States whose bosonic occupancies are all `<= cutoff − d`.
    pub fn interior_mask(&self, d: usize) -> Vec<bool> {
        (0..self.dim)
            .map(|s| {
                self.modes.iter().enumerate().all(|(k, m)| {
                    m.statistics == Statistics::Fermionic || self.occupancy(s, k) + d <= self.cutoff
                })
            })
            .collect()
    }
}

/// The vacuum `|0⟩` (all raw occupancies zero).
pub fn build_vacuum(space: &FockSpace) -> Vec<C64> {
    let mut v = vec![real(0.0); space.dim()];
    v[0] = real(1.0);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    C,
    Cdag,
    N,
}

/// A raw generator on the standard Fock module of `mode = (i,a)`:
/// `c†|n⟩ = |n+1⟩` (zero at the cutoff), `c|n⟩ = [n]_q |n−1⟩` for bosons,
/// `c|1⟩ = |0⟩` for fermions, `n` diagonal.
pub fn build_generator(
    space: &FockSpace,
    kind: GeneratorKind,
    mode: (usize, usize),
    q: C64,
) -> Result<SparseOperator> {
    let k = space.mode_index(mode.0, mode.1)?;
    let m = space.modes[k];
    let local_space = space.factors[k].clone();
    let d = local_space.dim();
    let mut trip = Vec::new();
    for n in 0..d {
        match kind {
            GeneratorKind::N => trip.push((n, n, real(n as f64))),
            GeneratorKind::Cdag => {
                if n + 1 < d {
                    trip.push((n + 1, n, real(1.0)));
                }
            }
            GeneratorKind::C => {
                if n >= 1 {
                    let v = match m.statistics {
                        Statistics::Bosonic => qnum(q, n as i64),
                        Statistics::Fermionic => real(1.0),
                    };
                    trip.push((n - 1, n, v));
                }
            }
        }
    }
    let local = SparseOperator::from_triplets(std::slice::from_ref(&local_space), trip);
    Ok(embed_factor(&local, k, &space.factors)?)
}

/// Parameters of the continuous oscillator automorphism
/// `c ↦ ξ c q^{Σ η n}, c† ↦ ξ⁻¹ q^{−Σ η n} c†`; indices run over modes.
#[derive(Debug, Clone, PartialEq)]
pub struct OscAutomorphismParams {
    pub xi: Vec<C64>,
    pub eta: Vec<Vec<C64>>,
}

impl OscAutomorphismParams {
    pub fn identity(modes: usize) -> Self {
        Self {
            xi: vec![real(1.0); modes],
            eta: vec![vec![real(0.0); modes]; modes],
        }
    }
}

/// The images of all oscillator generators on one Fock space.
///
/// Number operators are kept as exact integer diagonals so that q-powers of
/// them are formed by exponentiating eigenvalues, never by taking logarithms.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    space: FockSpace,
    q: C64,
    c: Vec<SparseOperator>,
    cdag: Vec<SparseOperator>,
    number: Vec<Vec<i64>>,
}

impl GeneratorSet {
    /// Generators on `space`; conjugate modes are transported by the discrete automorphism.
    pub fn new(space: &FockSpace, q: C64) -> Result<Self> {
        let mut c = Vec::new();
        let mut cdag = Vec::new();
        let mut number = Vec::new();
        for (k, m) in space.modes.iter().enumerate() {
            c.push(build_generator(space, GeneratorKind::C, (m.i, m.a), q)?);
            cdag.push(build_generator(space, GeneratorKind::Cdag, (m.i, m.a), q)?);
            number.push(
                (0..space.dim())
                    .map(|s| space.occupancy(s, k) as i64)
                    .collect(),
            );
        }
        let mut set = Self {
            space: space.clone(),
            q,
            c,
            cdag,
            number,
        };
        for k in 0..space.modes.len() {
            if space.conjugate[k] {
                set = set.transport_discrete(k);
            }
        }
        Ok(set)
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn c(&self, mode: usize) -> &SparseOperator {
        &self.c[mode]
    }

    pub fn cdag(&self, mode: usize) -> &SparseOperator {
        &self.cdag[mode]
    }

    pub fn number_diag(&self, mode: usize) -> &[i64] {
        &self.number[mode]
    }

    pub fn n(&self, mode: usize) -> SparseOperator {
        let d: Vec<C64> = self.number[mode].iter().map(|&v| real(v as f64)).collect();
        SparseOperator::diagonal(&self.space.factors(), &d)
    }

    pub fn identity(&self) -> SparseOperator {
        SparseOperator::identity(&self.space.factors())
    }

    /// Integer exponent vector `Σ coef·n_mode` over basis states.
    pub fn exponent(&self, coeffs: &[(usize, i64)]) -> Vec<i64> {
        (0..self.space.dim())
            .map(|s| coeffs.iter().map(|&(k, c)| c * self.number[k][s]).sum())
            .collect()
    }

    /// Diagonal operator `q^{Σ coef·n_mode}`.
    pub fn qpow(&self, coeffs: &[(usize, i64)]) -> SparseOperator {
        self.qpow_exponent(&self.exponent(coeffs))
    }

    pub fn qpow_exponent(&self, exps: &[i64]) -> SparseOperator {
        let d: Vec<C64> = exps.iter().map(|&e| self.q.powi(e as i32)).collect();
        SparseOperator::diagonal(&self.space.factors(), &d)
    }

    fn transport_discrete(mut self, k: usize) -> Self {
        let p = self.space.modes[k].parity();
        let sign = if p == 0 { -1.0 } else { 1.0 };
        let old_c = self.c[k].clone();
        self.c[k] = self.cdag[k].clone();
        self.cdag[k] = old_c.scale(real(sign));
        let shift = if p == 0 { 1 } else { -1 };
        self.number[k].iter_mut().for_each(|n| *n = -*n - shift);
        self
    }

    /// `n ↦ −n − (−1)^{p}, c ↦ c†, c† ↦ −(−1)^{p} c` on one mode.
    pub fn apply_discrete_automorphism(&self, mode: (usize, usize)) -> Result<Self> {
        let k = self.space.mode_index(mode.0, mode.1)?;
        Ok(self.clone().transport_discrete(k))
    }

    /// `c ↦ ξ c q^{Σ η n}, c† ↦ ξ⁻¹ q^{−Σ η n} c†, n ↦ n`.
    ///
    /// The q-power sits to the left of `c†`; on the right it would differ by
    /// the constant `q^{η_{ia,ia}}` and rescale `c c†`.
    pub fn apply_osc_automorphism(&self, params: &OscAutomorphismParams) -> Result<Self> {
        let nm = self.space.modes.len();
        if params.xi.len() != nm
            || params.eta.len() != nm
            || params.eta.iter().any(|r| r.len() != nm)
        {
            return Err(FockError::ParameterShape {
                expected: nm,
                got: params.xi.len(),
            });
        }
        for a in 0..nm {
            for b in 0..nm {
                if params.eta[a][b] != params.eta[b][a] {
                    return Err(FockError::EtaNotSymmetric);
                }
            }
        }
        let mut out = self.clone();
        let lq = self.q.ln();
        for k in 0..nm {
            let xi = params.xi[k];
            if xi == real(0.0) {
                let m = self.space.modes[k];
                return Err(FockError::ZeroXi { i: m.i, a: m.a });
            }
            let expo: Vec<C64> = (0..self.space.dim())
                .map(|s| {
                    (0..nm)
                        .map(|j| params.eta[k][j] * real(self.number[j][s] as f64))
                        .sum()
                })
                .collect();
            let up: Vec<C64> = expo.iter().map(|e| (e * lq).exp()).collect();
            let down: Vec<C64> = up.iter().map(|v| v.inv()).collect();
            let f = self.space.factors();
            out.c[k] = self.c[k].mul(&SparseOperator::diagonal(&f, &up))?.scale(xi);
            out.cdag[k] = SparseOperator::diagonal(&f, &down)
                .mul(&self.cdag[k])?
                .scale(xi.inv());
        }
        Ok(out)
    }
}

/// Evaluates the oscillator relations on the interior subspace (bosonic
/// occupancies `<= cutoff − 1`); residuals are relative to the size of the terms.
pub fn check_osc_relations(gens: &GeneratorSet) -> Result<RelationReport> {
    let space = gens.space();
    let p = space.profile();
    let q = gens.q();
    let keep = space.interior_mask(1);
    let keep = Some(keep.as_slice());
    let mut report = RelationReport::default();
    let nm = space.modes().len();
    for k in 0..nm {
        let m = space.modes()[k];
        let pm = m.parity();
        let (si, sa) = (p.sign(m.i) as i64, p.sign(m.a) as i64);
        let c = gens.c(k);
        let cd = gens.cdag(k);
        let cc = c.mul(cd)?;
        let dc = cd.mul(c)?;
        // [c, c†]_{q^{±s_a}} = q^{∓ s_i n}
        for (tag, sgn) in [("qosc-1", 1), ("qosc-2", -1)] {
            let lhs = graded_commutator(c, pm, cd, pm, q.powi((sgn * sa) as i32))?;
            let rhs = gens.qpow(&[(k, -sgn * si)]);
            report.push(
                format!("{tag}[{},{}]", m.i, m.a),
                relative_residual(&lhs, &rhs, &[&cc, &dc], keep)?,
            );
        }
        let n = gens.n(k);
        let lhs = graded_commutator(&n, 0, c, pm, real(1.0))?;
        report.push(
            format!("n-c[{},{}]", m.i, m.a),
            relative_residual(&lhs, &c.scale(real(-1.0)), &[], keep)?,
        );
        let lhs = graded_commutator(&n, 0, cd, pm, real(1.0))?;
        report.push(
            format!("n-cdag[{},{}]", m.i, m.a),
            relative_residual(&lhs, cd, &[], keep)?,
        );
        if m.statistics == Statistics::Fermionic {
            report.push_exact(format!("c-squared[{},{}]", m.i, m.a), c.mul(c)?.max_abs());
            report.push_exact(
                format!("cdag-squared[{},{}]", m.i, m.a),
                cd.mul(cd)?.max_abs(),
            );
        }
        for j in 0..nm {
            if j == k {
                continue;
            }
            let pj = space.modes()[j].parity();
            let zero = SparseOperator::zeros(&space.factors());
            for (name, x, px, y, py) in [
                ("c-c", c, pm, gens.c(j), pj),
                ("c-cdag", c, pm, gens.cdag(j), pj),
                ("cdag-cdag", cd, pm, gens.cdag(j), pj),
            ] {
                let com = graded_commutator(x, px, y, py, real(1.0))?;
                report.push(
                    format!("{name}[{k},{j}]"),
                    relative_residual(&com, &zero, &[&x.mul(y)?], keep)?,
                );
            }
            let com = graded_commutator(&n, 0, gens.c(j), pj, real(1.0))?;
            report.push(
                format!("n-c-cross[{k},{j}]"),
                relative_residual(&com, &zero, &[], keep)?,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_linalg::{c64, residual};

    fn profile(m: usize, n: usize) -> ParityProfile {
        ParityProfile::new(m, n).unwrap()
    }

    #[test]
    fn vacuum_single_boson_cutoff_3() {
        let s = FockSpace::new(&IndexSet::new(profile(2, 0), &[1]).unwrap(), 3).unwrap();
        let v = build_vacuum(&s);
        assert_eq!(v, vec![real(1.0), real(0.0), real(0.0), real(0.0)]);
    }

    #[test]
    fn vacuum_annihilated() {
        let s = FockSpace::new(&IndexSet::new(profile(2, 1), &[1]).unwrap(), 4).unwrap();
        let g = GeneratorSet::new(&s, c64(0.4, 0.2)).unwrap();
        let v = build_vacuum(&s);
        for k in 0..s.modes().len() {
            assert!(g.n(k).apply(&v).iter().all(|x| *x == real(0.0)));
            assert!(g.c(k).apply(&v).iter().all(|x| *x == real(0.0)));
            let up = g.cdag(k).apply(&v);
            let mut occ = vec![0; s.modes().len()];
            occ[k] = 1;
            assert_eq!(up[s.state_index(&occ)], real(1.0));
        }
    }

    #[test]
    fn boson_occupancy_two_at_half() {
        let s = FockSpace::new(&IndexSet::new(profile(2, 0), &[1]).unwrap(), 4).unwrap();
        let g = GeneratorSet::new(&s, real(0.5)).unwrap();
        let dc = g.cdag(0).mul(g.c(0)).unwrap();
        assert!((dc.get(2, 2) - real(2.5)).norm() < 1e-14);
        assert!((dc.get(1, 1) - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn fermion_anticommutator_is_one() {
        let s = FockSpace::new(&IndexSet::new(profile(1, 1), &[1]).unwrap(), 3).unwrap();
        let g = GeneratorSet::new(&s, c64(0.3, 0.5)).unwrap();
        let ac = g
            .c(0)
            .mul(g.cdag(0))
            .unwrap()
            .add(&g.cdag(0).mul(g.c(0)).unwrap())
            .unwrap();
        assert_eq!(residual(&ac, &g.identity()).unwrap(), 0.0);
    }

    #[test]
    fn dimension_formula() {
        // (2,1), I={1}: modes (1,2) bosonic, (1,3) fermionic
        let s = FockSpace::new(&IndexSet::new(profile(2, 1), &[1]).unwrap(), 5).unwrap();
        assert_eq!(s.dim(), 6 * 2);
        assert_eq!(s.modes()[1].statistics, Statistics::Fermionic);
    }

    #[test]
    fn shapes() {
        let p = profile(2, 1);
        assert_eq!(IndexSet::new(p, &[]).unwrap().shape(), IndexSetShape::Empty);
        assert_eq!(
            IndexSet::new(p, &[2]).unwrap().shape(),
            IndexSetShape::Single(2)
        );
        assert_eq!(
            IndexSet::new(p, &[1, 3]).unwrap().shape(),
            IndexSetShape::CoSingle(2)
        );
        assert_eq!(IndexSet::full(p).shape(), IndexSetShape::Full);
        let p4 = profile(2, 2);
        assert_eq!(
            IndexSet::new(p4, &[1, 2]).unwrap().shape(),
            IndexSetShape::Intermediate
        );
        assert_eq!(IndexSet::all_supported(profile(2, 0)).len(), 4);
    }

    #[test]
    fn cutoff_validation() {
        let i = IndexSet::new(profile(2, 0), &[1]).unwrap();
        assert_eq!(
            FockSpace::new(&i, 1).unwrap_err(),
            FockError::CutoffTooSmall(1)
        );
    }

    #[test]
    fn unknown_mode() {
        let s = FockSpace::new(&IndexSet::new(profile(2, 0), &[1]).unwrap(), 3).unwrap();
        assert!(matches!(
            build_generator(&s, GeneratorKind::C, (2, 1), real(0.5)),
            Err(FockError::UnknownMode { i: 2, a: 1 })
        ));
    }

    #[test]
    fn fermionic_discrete_automorphism_flips_occupation() {
        let s = FockSpace::new(&IndexSet::new(profile(1, 1), &[1]).unwrap(), 3).unwrap();
        let g = GeneratorSet::new(&s, real(0.5)).unwrap();
        let t = g.apply_discrete_automorphism((1, 2)).unwrap();
        assert_eq!(t.number_diag(0), &[1, 0]);
    }

    #[test]
    fn zero_xi_rejected() {
        let s = FockSpace::new(&IndexSet::new(profile(2, 0), &[1]).unwrap(), 3).unwrap();
        let g = GeneratorSet::new(&s, real(0.5)).unwrap();
        let mut p = OscAutomorphismParams::identity(1);
        p.xi[0] = real(0.0);
        assert!(matches!(
            g.apply_osc_automorphism(&p),
            Err(FockError::ZeroXi { .. })
        ));
    }

    #[test]
    fn continuous_automorphism_preserves_relations() {
        let p = ParityProfile::new(2, 1).unwrap();
        let iset = IndexSet::new(p, &[1]).unwrap();
        let space = FockSpace::new(&iset, 6).unwrap();
        let g = GeneratorSet::new(&space, c64(0.5, 0.35)).unwrap();
        let params = OscAutomorphismParams {
            xi: vec![c64(1.7, 0.4), c64(-0.3, 0.8)],
            eta: vec![
                vec![c64(0.3, 0.0), c64(-0.5, 0.2)],
                vec![c64(-0.5, 0.2), c64(0.1, 0.0)],
            ],
        };
        let before = check_osc_relations(&g).unwrap().max_residual();
        let after = check_osc_relations(&g.apply_osc_automorphism(&params).unwrap()).unwrap();
        assert!(
            after.max_residual() < 1e-13 && before < 1e-13,
            "{:?}",
            after.failures(1e-13)
        );
        let id = g
            .apply_osc_automorphism(&OscAutomorphismParams::identity(2))
            .unwrap();
        assert_eq!(
            crate::graded_linalg::residual(id.c(0), g.c(0)).unwrap(),
            0.0
        );
    }
}
