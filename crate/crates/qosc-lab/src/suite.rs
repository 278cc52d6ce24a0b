//! Batch driver: key-value configuration, deterministic sampling, parallel
//! execution of check suites and a versioned JSON report.
//!
//! Every suite case draws its parameters from its own ChaCha stream, seeded
//! by `(seed, case index)`, so results do not depend on the worker count or
//! on scheduling order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fock::{
    check_osc_relations, FockSpace, GeneratorSet, IndexSet, IndexSetShape, OscAutomorphismParams,
};
use crate::graded_linalg::{c64, real, ParityProfile, RelationReport, SparseOperator, C64};
use crate::loperators::{
    build_l_pair, check_appendix_a, check_contracted_relations, check_intertwining,
    check_rll_affine, check_rll_finite, vacuum_highest_weight,
};
use crate::rmatrix::{check_chevalley_relations, check_graded_ybe, fundamental_rep};
use crate::tq::{
    check_kr_limit, check_qq_relations, check_verma_factorization, closed_form_height_coefficients,
    commutator_residual, drinfeld_polynomial, lattice_q, lattice_t_fundamental, normalization_z,
    normalization_z_trace, one_site_q, poly_eval, verma_series_coefficients, CutoffPolicy,
    LatticeConfig, QqKind, QqOptions, TwistParams,
};

/// Report schema identifier and version written to every report header.
pub const SCHEMA: &str = "qosc-lab/report";
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "QOSC_WORKERS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` does not apply to profile ({m},{n}): {why}")]
    SuiteNotApplicable {
        suite: &'static str,
        m: usize,
        n: usize,
        why: &'static str,
    },
    #[error(
        "index set {set} has no explicit L-operator; add `skip_unsupported = true` to drop it"
    )]
    UnsupportedIndexSet { set: String },
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("invalid worker count in {WORKERS_ENV}: `{0}`")]
    Workers(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ybe,
    Rll,
    AppendixA,
    ContractedSerre,
    Intertwining,
    OscRelations,
    QOneSite,
    Qq,
    Commutativity,
    Characters,
    KrLimit,
    Drinfeld,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Ybe,
        Suite::Rll,
        Suite::AppendixA,
        Suite::ContractedSerre,
        Suite::Intertwining,
        Suite::OscRelations,
        Suite::QOneSite,
        Suite::Qq,
        Suite::Commutativity,
        Suite::Characters,
        Suite::KrLimit,
        Suite::Drinfeld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ybe => "ybe",
            Suite::Rll => "rll",
            Suite::AppendixA => "appendix-a",
            Suite::ContractedSerre => "contracted-serre",
            Suite::Intertwining => "intertwining",
            Suite::OscRelations => "osc-relations",
            Suite::QOneSite => "q-one-site",
            Suite::Qq => "qq",
            Suite::Commutativity => "commutativity",
            Suite::Characters => "characters",
            Suite::KrLimit => "kr-limit",
            Suite::Drinfeld => "drinfeld",
        }
    }

    /// Tolerance of the suite's main checks (overridable with `tol.<suite>`).
    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Ybe | Suite::Drinfeld => 1e-12,
            Suite::QOneSite | Suite::Commutativity => 1e-8,
            Suite::Qq => 1e-7,
            Suite::KrLimit => 0.1,
            Suite::OscRelations => 1e-12,
            _ => 1e-10,
        }
    }

    /// Why the suite cannot run on `p`, if it cannot.
    fn inapplicable(self, p: ParityProfile) -> Option<&'static str> {
        match self {
            Suite::Qq if p.rank() > 3 => Some("QQ-relations need M+N <= 3"),
            Suite::KrLimit if p.n != 0 => Some("the Kirillov-Reshetikhin limit needs N = 0"),
            Suite::Drinfeld if p.rank() < 2 => Some("needs M+N >= 2"),
            _ => None,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ConfigError::UnknownSuite(s.to_string()))
    }
}

/// One entry of the check registry.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheckInfo {
    pub id: &'static str,
    pub suite: Suite,
    /// Short name of the relation being tested, carried by every record.
    pub anchor: &'static str,
    pub statement: &'static str,
    pub tolerance: &'static str,
}

const REL: &str = "relative residual |lhs − rhs| / max(1, largest term) below the suite tolerance";

pub const REGISTRY: &[CheckInfo] = &[
    CheckInfo {
        id: "ybe",
        suite: Suite::Ybe,
        anchor: "graded Yang-Baxter equation",
        statement: "R12(x1,x2) R13(x1,x3) R23(x2,x3) = R23(x2,x3) R13(x1,x3) R12(x1,x2) for the Perk-Schultz R-matrix on V⊗V⊗V with Koszul signs",
        tolerance: "relative residual < 1e-12",
    },
    CheckInfo {
        id: "chevalley",
        suite: Suite::Ybe,
        anchor: "Chevalley-Serre relations, evaluation representation",
        statement: "the images of e_i, f_i, k_i (i = 0..M+N-1) in the fundamental evaluation representation satisfy the Cartan, [e,f], Serre and extra super-Serre relations",
        tolerance: "relative residual < 1e-12; the level-zero identity exactly",
    },
    CheckInfo {
        id: "rll-affine",
        suite: Suite::Rll,
        anchor: "affine RLL relation",
        statement: "R23(x,y) L13(y) L12(x) = L12(x) L13(y) R23(x,y) for L(x) = L − L̄/x, evaluated on Fock states away from the cutoff",
        tolerance: REL,
    },
    CheckInfo {
        id: "rll-finite",
        suite: Suite::Rll,
        anchor: "finite RLL relations",
        statement: "R L1 L2 = L2 L1 R for the pairs (L,L), (L̄,L̄), (L,L̄) with the constant R-matrix",
        tolerance: REL,
    },
    CheckInfo {
        id: "appendix-a",
        suite: Suite::AppendixA,
        anchor: "component relations of the contracted FRT algebra",
        statement: "entrywise commutation/exchange relations among L_ab and L̄_ab (families A1-A16) following from RLL with triangular L, L̄",
        tolerance: REL,
    },
    CheckInfo {
        id: "appendix-a-structure",
        suite: Suite::AppendixA,
        anchor: "structural zeros of the contracted L-operators",
        statement: "triangularity, odd-entry nilpotency, L̄_aa = 0 on the complement, L_ii L̄_ii = 1 on I and the subsidiary zeros",
        tolerance: "exactly zero",
    },
    CheckInfo {
        id: "ef-cont",
        suite: Suite::ContractedSerre,
        anchor: "contracted [e,f] relation",
        statement: "[e_i, f_j} = δ_ij (k_i − k̄_i)/(q − q⁻¹) with k̄_i = 0 for contracted nodes, in all four branches",
        tolerance: REL,
    },
    CheckInfo {
        id: "contracted-cartan",
        suite: Suite::ContractedSerre,
        anchor: "contracted Cartan relations",
        statement: "k_i e_j k_i⁻¹ = q^{a_ij} e_j and k_i f_j k_i⁻¹ = q^{−a_ij} f_j for the images under ρ_I(x)",
        tolerance: REL,
    },
    CheckInfo {
        id: "contracted-structure",
        suite: Suite::ContractedSerre,
        anchor: "contracted generator structure",
        statement: "f_i = 0 where the contraction removes it and k̄_i = k_i⁻¹ on uncontracted nodes",
        tolerance: "exactly zero",
    },
    CheckInfo {
        id: "serre-cont",
        suite: Suite::ContractedSerre,
        anchor: "contracted Serre-type relations",
        statement: "cubic, quartic and super-Serre relations that survive the contraction (families 1-13, each under its membership condition)",
        tolerance: REL,
    },
    CheckInfo {
        id: "standard-serre",
        suite: Suite::ContractedSerre,
        anchor: "uncontracted Serre relations",
        statement: "[e_i,e_j] = 0 for a_ij = 0 and the affine q-Serre relations, wherever the Cartan matrix defines them",
        tolerance: REL,
    },
    CheckInfo {
        id: "intertwining",
        suite: Suite::Intertwining,
        anchor: "intertwining relations",
        statement: "L(y/x) intertwines ρ_I(x) ⊗ π(y) with its opposite coproduct image for k_i, e_i and f_i, including the degenerate 0 = 0 branches",
        tolerance: REL,
    },
    CheckInfo {
        id: "osc-relations",
        suite: Suite::OscRelations,
        anchor: "q-oscillator superalgebra",
        statement: "c c† − q^{±1} c† c = q^{∓n}-type relations, [n, c] = −c, [n, c†] = c†, odd modes nilpotent, distinct modes (super)commute",
        tolerance: "residual < 1e-12 on interior states; nilpotency exactly",
    },
    CheckInfo {
        id: "osc-automorphism",
        suite: Suite::OscRelations,
        anchor: "oscillator automorphisms",
        statement: "the discrete automorphism n ↦ −n−1, c ↦ c†, c† ↦ −c and the continuous rescaling c ↦ ξ c q^{ηn} preserve every oscillator relation",
        tolerance: "residual < 1e-12 on interior states",
    },
    CheckInfo {
        id: "vacuum-weight",
        suite: Suite::Drinfeld,
        anchor: "vacuum highest weight",
        statement: "the Fock vacuum is an eigenvector of every L_ii(x), with eigenvalue 1 − 1/x for i ∈ I and 1 otherwise",
        tolerance: REL,
    },
    CheckInfo {
        id: "drinfeld-ratio",
        suite: Suite::Drinfeld,
        anchor: "Drinfeld rational fraction of the vacuum",
        statement: "ν_i/ν_{i+1} of the vacuum eigenvalues agrees with the rational fraction predicted by the index set",
        tolerance: REL,
    },
    CheckInfo {
        id: "drinfeld-degree",
        suite: Suite::Drinfeld,
        anchor: "Drinfeld polynomial degree",
        statement: "P_i has degree λ_i − (−1)^{p(i)+p(i+1)} λ_{i+1} and constant term 1",
        tolerance: "exact",
    },
    CheckInfo {
        id: "drinfeld-shift",
        suite: Suite::Drinfeld,
        anchor: "Drinfeld polynomial string",
        statement: "P_i(x q^{−2(−1)^{p(i)}}) / P_i(x) = (1 − x a q^{−2(−1)^{p(i)} d}) / (1 − x a), a = q^{−2(−1)^{p(i+1)} λ_{i+1}}",
        tolerance: "relative residual < 1e-12",
    },
    CheckInfo {
        id: "q-one-site",
        suite: Suite::QOneSite,
        anchor: "one-site Q-operator",
        statement: "the traced Q_I(x) on one site equals the diagonal closed form 1 − (x/ξ) Π_b ((1 − z'_b/z'_i)/(1 − z'_b q^{2s_i}/z'_i))^{±1} on I and 1 on the complement",
        tolerance: "entrywise < max(1e-8, cutoff change)",
    },
    CheckInfo {
        id: "q-at-zero",
        suite: Suite::QOneSite,
        anchor: "Q-operator at x = 0",
        statement: "the one-site closed form is the identity at x = 0",
        tolerance: "exact",
    },
    CheckInfo {
        id: "qq-1",
        suite: Suite::Qq,
        anchor: "QQ-relation, equal parities",
        statement: "p(i) = p(j): (z_i − z_j) Q_I(x q^{1−2p(i)}) Q_{I∪{i,j}}(x q^{−1+2p(i)}) = z_i Q_{I∪{i}}(x q^{−1+2p(i)}) Q_{I∪{j}}(x q^{1−2p(i)}) − z_j Q_{I∪{i}}(x q^{1−2p(i)}) Q_{I∪{j}}(x q^{−1+2p(i)})",
        tolerance: "L = 1: < 1e-12 (closed forms); L >= 2: < 1e-7 (adaptive traces). Failures outside (2|0), (3|0), (2|1) are findings",
    },
    CheckInfo {
        id: "qq-2",
        suite: Suite::Qq,
        anchor: "QQ-relation, mixed parities",
        statement: "p(i) ≠ p(j): (z_i − z_j) Q_{I∪{i}}(x q^{−1+2p(i)}) Q_{I∪{j}}(x q^{1−2p(i)}) = z_i Q_I(x q^{1−2p(i)}) Q_{I∪{i,j}}(x q^{−1+2p(i)}) − z_j Q_I(x q^{−1+2p(i)}) Q_{I∪{i,j}}(x q^{1−2p(i)})",
        tolerance: "L = 1: < 1e-12 (closed forms); L >= 2: < 1e-7 (adaptive traces). Failures outside (2|0), (3|0), (2|1) are findings",
    },
    CheckInfo {
        id: "commute-tt",
        suite: Suite::Commutativity,
        anchor: "commuting transfer matrices",
        statement: "[T(x), T(y)] = 0 for the fundamental transfer matrix with diagonal twist",
        tolerance: "|[A,B]| / max(1,|AB|) < 1e-8",
    },
    CheckInfo {
        id: "commute-tq",
        suite: Suite::Commutativity,
        anchor: "T-Q commutativity",
        statement: "[T(x), Q_I(y)] = 0",
        tolerance: "|[A,B]| / max(1,|AB|) < 1e-8",
    },
    CheckInfo {
        id: "commute-qq",
        suite: Suite::Commutativity,
        anchor: "Q-Q commutativity",
        statement: "[Q_I(x), Q_J(y)] = 0",
        tolerance: "|[A,B]| / max(1,|AB|) < 1e-8",
    },
    CheckInfo {
        id: "character-series",
        suite: Suite::Characters,
        anchor: "Verma supercharacter",
        statement: "height coefficients of the closed-form Verma supercharacter equal the PBW enumeration (even roots unbounded, odd roots at most once) up to degree 8",
        tolerance: "< 1e-10 per coefficient",
    },
    CheckInfo {
        id: "normalization-trace",
        suite: Suite::Characters,
        anchor: "oscillator normalization",
        statement: "the truncated supertrace of the Fock boundary operator equals Π (1 − z_a/z_i)^{−(−1)^{p(i)+p(a)}}",
        tolerance: "difference below the computed truncation tail bound",
    },
    CheckInfo {
        id: "verma-factorization",
        suite: Suite::Characters,
        anchor: "Verma factorization",
        statement: "the one-site Verma T-operator equals Z⁺(λ) Π_j Q_{j}(x q^{−2(s_j λ_j − Σ_{k<j} s_k)})",
        tolerance: "relative residual < 1e-12",
    },
    CheckInfo {
        id: "kr-limit",
        suite: Suite::KrLimit,
        anchor: "Kirillov-Reshetikhin limit",
        statement: "S_{(m^|I|)}(z) / Π_{k∈I} z_k^m → Z_I as m → ∞ with error ratio max|z_a/z_i|",
        tolerance: "last error ratio within 10% of the prediction; exactly 1 for I empty or full",
    },
];

/// Looks up a registry entry.
pub fn check_info(id: &str) -> Option<&'static CheckInfo> {
    REGISTRY.iter().find(|c| c.id == id)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown check id `{0}` (see `suite list`)")]
pub struct UnknownCheck(pub String);

/// Human-readable description of a check.
pub fn explain(id: &str) -> Result<String, UnknownCheck> {
    let c = check_info(id).ok_or_else(|| UnknownCheck(id.to_string()))?;
    Ok(format!(
        "{id}  [suite {suite}]\nrelation:  {anchor}\nidentity:  {st}\ntolerance: {tol}\n",
        id = c.id,
        suite = c.suite,
        anchor = c.anchor,
        st = c.statement,
        tol = c.tolerance
    ))
}

/// Which index sets a suite runs over.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexSetSpec {
    AllSupported,
    List(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TwistSpec {
    RandomConvergent,
    Values(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum XiSpec {
    Random,
    Values(Vec<C64>),
}

/// A parsed run configuration. See `configs/default.conf` for the keys.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub profile: ParityProfile,
    pub index_sets: IndexSetSpec,
    pub skip_unsupported: bool,
    /// `None` = every suite applicable to the profile.
    pub suites: Option<Vec<Suite>>,
    pub seed: u64,
    pub q_samples: usize,
    pub q_modulus: (f64, f64),
    /// Fock cutoff for the algebraic suites.
    pub cutoff: usize,
    pub trace: CutoffPolicy,
    pub sites: usize,
    pub xi: XiSpec,
    pub twist: TwistSpec,
    pub inverted_shift: bool,
    pub ybe_samples: usize,
    pub factorization_draws: usize,
    pub kr_m_max: usize,
    pub tolerances: BTreeMap<Suite, f64>,
}

impl SuiteConfig {
    pub fn new(profile: ParityProfile) -> Self {
        Self {
            profile,
            index_sets: IndexSetSpec::AllSupported,
            skip_unsupported: false,
            suites: None,
            seed: 1,
            q_samples: 2,
            q_modulus: (0.4, 0.8),
            cutoff: 6,
            trace: CutoffPolicy::default(),
            sites: 2,
            xi: XiSpec::Random,
            twist: TwistSpec::RandomConvergent,
            inverted_shift: false,
            ybe_samples: 20,
            factorization_draws: 20,
            kr_m_max: 12,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn with_suites(mut self, suites: &[Suite]) -> Self {
        self.suites = Some(suites.to_vec());
        self
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    pub fn tolerance(&self, suite: Suite) -> f64 {
        self.tolerances
            .get(&suite)
            .copied()
            .unwrap_or_else(|| suite.default_tolerance())
    }

    /// The suites that will run, in canonical order.
    pub fn selected_suites(&self) -> Result<Vec<Suite>, ConfigError> {
        let p = self.profile;
        match &self.suites {
            None => Ok(Suite::ALL
                .into_iter()
                .filter(|s| s.inapplicable(p).is_none())
                .collect()),
            Some(list) => {
                let mut out = Vec::new();
                for &s in list {
                    if let Some(why) = s.inapplicable(p) {
                        return Err(ConfigError::SuiteNotApplicable {
                            suite: s.name(),
                            m: p.m,
                            n: p.n,
                            why,
                        });
                    }
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
                out.sort();
                Ok(out)
            }
        }
    }

    /// Resolved index sets; intermediate sets are an error unless skipped.
    pub fn resolved_index_sets(&self) -> Result<Vec<IndexSet>, ConfigError> {
        let p = self.profile;
        match &self.index_sets {
            IndexSetSpec::AllSupported => Ok(IndexSet::all_supported(p)),
            IndexSetSpec::List(list) => {
                let mut out = Vec::new();
                for members in list {
                    let set = IndexSet::new(p, members).map_err(|e| ConfigError::Value {
                        key: "index_sets".into(),
                        msg: e.to_string(),
                    })?;
                    if set.shape() == IndexSetShape::Intermediate {
                        if self.skip_unsupported {
                            continue;
                        }
                        return Err(ConfigError::UnsupportedIndexSet {
                            set: format_set(members),
                        });
                    }
                    out.push(set);
                }
                Ok(out)
            }
        }
    }

    /// Validates every cross-field constraint.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: &str| {
            Err(ConfigError::Value {
                key: key.into(),
                msg: msg.into(),
            })
        };
        self.selected_suites()?;
        self.resolved_index_sets()?;
        let (lo, hi) = self.q_modulus;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return bad("q_modulus", "need 0 < lo <= hi < 1");
        }
        if self.q_samples == 0 {
            return bad("q_samples", "must be positive");
        }
        if self.cutoff < 4 {
            return bad(
                "cutoff",
                "must be at least 4 (interior checks drop up to 4 levels)",
            );
        }
        if self.sites == 0 {
            return bad("sites", "must be positive");
        }
        if let XiSpec::Values(v) = &self.xi {
            if v.len() != self.sites || v.iter().any(|x| x.norm() == 0.0) {
                return bad("xi", "need `sites` non-zero values");
            }
        }
        if let TwistSpec::Values(v) = &self.twist {
            if v.len() != self.profile.rank() || v.iter().any(|x| x.norm() == 0.0) {
                return bad("twist", "need M+N non-zero values");
            }
        }
        if self.trace.start < 2 || self.trace.max < self.trace.start + 3 {
            return bad(
                "trace_cutoff",
                "need 2 <= trace_cutoff and trace_cutoff + 3 <= trace_cutoff_max",
            );
        }
        if self.kr_m_max < 3 {
            return bad("kr_m_max", "need at least 3");
        }
        Ok(())
    }

    /// Canonical key-value echo of the configuration (stored in the report header).
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("profile", format!("{},{}", self.profile.m, self.profile.n));
        put(
            "index_sets",
            match &self.index_sets {
                IndexSetSpec::AllSupported => "all-supported".into(),
                IndexSetSpec::List(l) => l
                    .iter()
                    .map(|s| format_set(s))
                    .collect::<Vec<_>>()
                    .join(";"),
            },
        );
        put("skip_unsupported", self.skip_unsupported.to_string());
        put(
            "suites",
            match &self.suites {
                None => "all".into(),
                Some(l) => l.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
            },
        );
        put("seed", self.seed.to_string());
        put("q_samples", self.q_samples.to_string());
        put(
            "q_modulus",
            format!("{:?},{:?}", self.q_modulus.0, self.q_modulus.1),
        );
        put("cutoff", self.cutoff.to_string());
        put("trace_cutoff", self.trace.start.to_string());
        put("trace_cutoff_max", self.trace.max.to_string());
        put("trace_tol", format!("{:?}", self.trace.tol));
        put("sites", self.sites.to_string());
        put(
            "xi",
            match &self.xi {
                XiSpec::Random => "random".into(),
                XiSpec::Values(v) => join_complex(v),
            },
        );
        put(
            "twist",
            match &self.twist {
                TwistSpec::RandomConvergent => "random-convergent".into(),
                TwistSpec::Values(v) => join_complex(v),
            },
        );
        put("inverted_shift", self.inverted_shift.to_string());
        put("ybe_samples", self.ybe_samples.to_string());
        put("factorization_draws", self.factorization_draws.to_string());
        put("kr_m_max", self.kr_m_max.to_string());
        for (s, t) in &self.tolerances {
            put(&format!("tol.{s}"), format!("{t:?}"));
        }
        m
    }
}

fn format_set(members: &[usize]) -> String {
    if members.is_empty() {
        "-".into()
    } else {
        members
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Formats a complex number as `re+imi` with round-trip precision.
pub fn format_complex(z: C64) -> String {
    format!(
        "{:?}{}{:?}i",
        z.re,
        if z.im.is_sign_negative() { "-" } else { "+" },
        z.im.abs()
    )
}

fn join_complex(v: &[C64]) -> String {
    v.iter()
        .map(|z| format_complex(*z))
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (exponents allowed).
pub fn parse_complex(s: &str) -> Option<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse().ok().map(real);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().ok()?,
    };
    Some(c64(re, im))
}

impl FromStr for SuiteConfig {
    type Err = ConfigError;

    /// `key = value` lines; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: k + 1 })?;
            let key = key.trim().to_string();
            if entries.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { line: k + 1, key });
            }
            entries.insert(key, (k + 1, val.trim().to_string()));
        }
        let bad = |key: &str, msg: String| ConfigError::Value {
            key: key.into(),
            msg,
        };
        let num = |key: &str, v: &str| -> Result<usize, ConfigError> {
            v.parse()
                .map_err(|_| bad(key, format!("`{v}` is not a non-negative integer")))
        };
        let float = |key: &str, v: &str| -> Result<f64, ConfigError> {
            v.parse()
                .map_err(|_| bad(key, format!("`{v}` is not a number")))
        };
        let boolean = |key: &str, v: &str| -> Result<bool, ConfigError> {
            v.parse()
                .map_err(|_| bad(key, format!("`{v}` is not true/false")))
        };
        let complex_list = |key: &str, v: &str| -> Result<Vec<C64>, ConfigError> {
            v.split(',')
                .map(|s| {
                    parse_complex(s)
                        .ok_or_else(|| bad(key, format!("`{s}` is not a complex number")))
                })
                .collect()
        };

        let (_, pv) = entries
            .get("profile")
            .ok_or_else(|| bad("profile", "missing".into()))?;
        let dims: Vec<&str> = pv.split(',').map(str::trim).collect();
        if dims.len() != 2 {
            return Err(bad("profile", format!("expected `M,N`, got `{pv}`")));
        }
        let profile = ParityProfile::new(num("profile", dims[0])?, num("profile", dims[1])?)
            .map_err(|e| bad("profile", e.to_string()))?;
        let mut cfg = SuiteConfig::new(profile);

        for (key, (line, v)) in &entries {
            let v = v.as_str();
            match key.as_str() {
                "profile" => {}
                "index_sets" => {
                    cfg.index_sets = if v == "all-supported" {
                        IndexSetSpec::AllSupported
                    } else {
                        let mut sets = Vec::new();
                        for s in v.split(';').map(str::trim) {
                            if s == "-" || s.is_empty() {
                                sets.push(Vec::new());
                            } else {
                                sets.push(
                                    s.split(',')
                                        .map(|k| num("index_sets", k.trim()))
                                        .collect::<Result<Vec<_>, _>>()?,
                                );
                            }
                        }
                        IndexSetSpec::List(sets)
                    }
                }
                "skip_unsupported" => cfg.skip_unsupported = boolean(key, v)?,
                "suites" => {
                    cfg.suites = if v == "all" {
                        None
                    } else {
                        Some(
                            v.split(',')
                                .map(|s| s.trim().parse())
                                .collect::<Result<Vec<_>, _>>()?,
                        )
                    }
                }
                "seed" => {
                    cfg.seed = v
                        .parse()
                        .map_err(|_| bad(key, format!("`{v}` is not a u64")))?
                }
                "q_samples" => cfg.q_samples = num(key, v)?,
                "q_modulus" => {
                    let parts: Vec<&str> = v.split(',').collect();
                    cfg.q_modulus = match parts.as_slice() {
                        [a] => {
                            let r = float(key, a.trim())?;
                            (r, r)
                        }
                        [a, b] => (float(key, a.trim())?, float(key, b.trim())?),
                        _ => return Err(bad(key, "expected `r` or `lo,hi`".into())),
                    }
                }
                "cutoff" => cfg.cutoff = num(key, v)?,
                "trace_cutoff" => cfg.trace.start = num(key, v)?,
                "trace_cutoff_max" => cfg.trace.max = num(key, v)?,
                "trace_tol" => cfg.trace.tol = float(key, v)?,
                "sites" => cfg.sites = num(key, v)?,
                "xi" => {
                    cfg.xi = if v == "random" {
                        XiSpec::Random
                    } else {
                        XiSpec::Values(complex_list(key, v)?)
                    }
                }
                "twist" => {
                    cfg.twist = if v == "random-convergent" {
                        TwistSpec::RandomConvergent
                    } else {
                        TwistSpec::Values(complex_list(key, v)?)
                    }
                }
                "inverted_shift" => cfg.inverted_shift = boolean(key, v)?,
                "ybe_samples" => cfg.ybe_samples = num(key, v)?,
                "factorization_draws" => cfg.factorization_draws = num(key, v)?,
                "kr_m_max" => cfg.kr_m_max = num(key, v)?,
                k if k.starts_with("tol.") => {
                    let suite: Suite = k["tol.".len()..].parse()?;
                    cfg.tolerances.insert(suite, float(k, v)?);
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: *line,
                        key: key.clone(),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A failure of a relation that is only conjectured for this profile.
    Finding,
}

/// One checked identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub check: &'static str,
    pub anchor: &'static str,
    /// Individual relation within the check (e.g. a Serre family and its indices).
    pub relation: String,
    pub case: usize,
    /// Everything needed to reproduce the record.
    pub params: BTreeMap<String, String>,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub exact: bool,
    pub truncation_bound: Option<f64>,
    pub status: Status,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportHeader {
    pub schema: &'static str,
    pub schema_version: u32,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseTiming {
    pub case: usize,
    pub suite: Suite,
    pub millis: f64,
}

/// A full run: the deterministic body (header, records, summary) and the
/// wall-clock timing, which is kept apart so that bodies can be diffed.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: ReportHeader,
    pub records: Vec<CheckRecord>,
    pub summary: BTreeMap<Suite, SuiteSummary>,
    pub timing: Vec<CaseTiming>,
}

#[derive(Serialize)]
struct Body<'a> {
    header: &'a ReportHeader,
    records: &'a [CheckRecord],
    summary: &'a BTreeMap<Suite, SuiteSummary>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    /// 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// JSON of the deterministic part (no timing).
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&Body {
            header: &self.header,
            records: &self.records,
            summary: &self.summary,
        })
        .expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn text_summary(&self) -> String {
        let mut s = String::new();
        for (suite, sum) in &self.summary {
            s += &format!(
                "{:<17} {:>5} checks  {:>5} pass  {:>3} fail  {:>3} findings  max residual {:.2e}\n",
                suite.name(),
                sum.total,
                sum.passed,
                sum.failed,
                sum.findings,
                sum.max_residual
            );
        }
        for r in self.failures().take(20) {
            s += &format!(
                "FAIL {} / {} ({}): residual {:?} > {:e} {}\n  params: {:?}\n",
                r.check,
                r.relation,
                r.anchor,
                r.residual,
                r.tolerance,
                r.error.as_deref().unwrap_or(""),
                r.params
            );
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Worker count from the environment (`None` = rayon default).
pub fn workers_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Workers(v)),
        },
    }
}

#[derive(Debug, Clone)]
enum CaseKind {
    Ybe,
    Rll(IndexSet),
    AppendixA(IndexSet),
    Contracted(IndexSet),
    Intertwining(IndexSet),
    Osc(IndexSet),
    OneSite(IndexSet),
    Qq {
        base: Vec<usize>,
        i: usize,
        j: usize,
        sites: usize,
    },
    Commutativity,
    Series,
    NormTrace(IndexSet),
    Factorization,
    Kr(IndexSet),
    Drinfeld,
    Vacuum(IndexSet),
}

#[derive(Debug, Clone)]
struct Case {
    suite: Suite,
    sample: usize,
    kind: CaseKind,
}

fn subsets_without(n: usize, excluded: &[usize]) -> Vec<Vec<usize>> {
    let free: Vec<usize> = (1..=n).filter(|k| !excluded.contains(k)).collect();
    (0..1usize << free.len())
        .map(|mask| {
            free.iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &k)| k)
                .collect()
        })
        .collect()
}

fn enumerate_cases(cfg: &SuiteConfig) -> Result<Vec<Case>, ConfigError> {
    let p = cfg.profile;
    let sets = cfg.resolved_index_sets()?;
    let mut cases = Vec::new();
    let mut push = |suite: Suite, sample: usize, kind: CaseKind| {
        cases.push(Case {
            suite,
            sample,
            kind,
        })
    };
    for suite in cfg.selected_suites()? {
        let per_set = |f: fn(IndexSet) -> CaseKind,
                       push: &mut dyn FnMut(Suite, usize, CaseKind)| {
            for s in 0..cfg.q_samples {
                for set in &sets {
                    push(suite, s, f(set.clone()));
                }
            }
        };
        match suite {
            Suite::Ybe => (0..cfg.ybe_samples).for_each(|s| push(suite, s, CaseKind::Ybe)),
            Suite::Rll => per_set(CaseKind::Rll, &mut push),
            Suite::AppendixA => per_set(CaseKind::AppendixA, &mut push),
            Suite::ContractedSerre => per_set(CaseKind::Contracted, &mut push),
            Suite::Intertwining => per_set(CaseKind::Intertwining, &mut push),
            Suite::OscRelations => per_set(CaseKind::Osc, &mut push),
            Suite::QOneSite => per_set(CaseKind::OneSite, &mut push),
            Suite::Qq => {
                let mut site_counts = vec![1];
                if cfg.sites > 1 {
                    site_counts.push(cfg.sites);
                }
                for s in 0..cfg.q_samples {
                    for &sites in &site_counts {
                        for i in p.indices() {
                            for j in p.indices().filter(|&j| j != i) {
                                for base in subsets_without(p.rank(), &[i, j]) {
                                    push(suite, s, CaseKind::Qq { base, i, j, sites });
                                }
                            }
                        }
                    }
                }
            }
            Suite::Commutativity => {
                (0..cfg.q_samples).for_each(|s| push(suite, s, CaseKind::Commutativity))
            }
            Suite::Characters => {
                for s in 0..cfg.q_samples {
                    push(suite, s, CaseKind::Series);
                    for set in &sets {
                        push(suite, s, CaseKind::NormTrace(set.clone()));
                    }
                }
                (0..cfg.factorization_draws).for_each(|s| push(suite, s, CaseKind::Factorization));
            }
            Suite::KrLimit => {
                // the limit needs no L-operator, so every subset is allowed
                for set in subsets_without(p.rank(), &[]) {
                    push(
                        suite,
                        0,
                        CaseKind::Kr(IndexSet::new(p, &set).expect("valid subset")),
                    );
                }
            }
            Suite::Drinfeld => {
                (0..cfg.q_samples).for_each(|s| push(suite, s, CaseKind::Drinfeld));
                per_set(CaseKind::Vacuum, &mut push);
            }
        }
    }
    Ok(cases)
}

/// Uniform point of an annulus `lo <= |z| <= hi`.
fn sample_annulus<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    let r = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    case: &'a Case,
    index: usize,
    params: BTreeMap<String, String>,
    records: Vec<CheckRecord>,
}

impl<'a> Ctx<'a> {
    fn param(&mut self, k: &str, v: impl Into<String>) {
        self.params.insert(k.to_string(), v.into());
    }

    fn cparam(&mut self, k: &str, z: C64) {
        self.param(k, format_complex(z));
    }

    fn record(
        &mut self,
        check: &'static str,
        relation: impl Into<String>,
        residual: f64,
        tol: f64,
        exact: bool,
    ) {
        self.record_full(check, relation.into(), residual, tol, exact, None, false);
    }

    #[allow(clippy::too_many_arguments)]
    fn record_full(
        &mut self,
        check: &'static str,
        relation: String,
        residual: f64,
        tol: f64,
        exact: bool,
        truncation_bound: Option<f64>,
        finding_on_failure: bool,
    ) {
        let info = check_info(check).expect("registered check");
        let ok = if exact {
            residual == 0.0
        } else {
            residual <= tol
        };
        let status = match (ok, finding_on_failure) {
            (true, _) => Status::Pass,
            (false, true) => Status::Finding,
            (false, false) => Status::Fail,
        };
        self.records.push(CheckRecord {
            suite: self.case.suite,
            check,
            anchor: info.anchor,
            relation,
            case: self.index,
            params: self.params.clone(),
            residual: residual.is_finite().then_some(residual),
            tolerance: if exact { 0.0 } else { tol },
            exact,
            truncation_bound,
            status,
            error: None,
        });
    }

    fn relations(
        &mut self,
        report: &RelationReport,
        tol: f64,
        classify: impl Fn(&str, bool) -> &'static str,
    ) {
        for r in &report.records {
            let id = classify(&r.name, r.exact);
            self.record(id, r.name.clone(), r.residual, tol, r.exact);
        }
    }

    fn error(&mut self, check: &'static str, msg: String) {
        let info = check_info(check).expect("registered check");
        self.records.push(CheckRecord {
            suite: self.case.suite,
            check,
            anchor: info.anchor,
            relation: "error".into(),
            case: self.index,
            params: self.params.clone(),
            residual: None,
            tolerance: self.cfg.tolerance(self.case.suite),
            exact: false,
            truncation_bound: None,
            status: Status::Fail,
            error: Some(msg),
        });
    }
}

fn default_check(kind: &CaseKind) -> &'static str {
    match kind {
        CaseKind::Ybe => "ybe",
        CaseKind::Rll(_) => "rll-affine",
        CaseKind::AppendixA(_) => "appendix-a",
        CaseKind::Contracted(_) => "ef-cont",
        CaseKind::Intertwining(_) => "intertwining",
        CaseKind::Osc(_) => "osc-relations",
        CaseKind::OneSite(_) => "q-one-site",
        CaseKind::Qq { .. } => "qq-1",
        CaseKind::Commutativity => "commute-qq",
        CaseKind::Series => "character-series",
        CaseKind::NormTrace(_) => "normalization-trace",
        CaseKind::Factorization => "verma-factorization",
        CaseKind::Kr(_) => "kr-limit",
        CaseKind::Drinfeld => "drinfeld-degree",
        CaseKind::Vacuum(_) => "vacuum-weight",
    }
}

fn contracted_id(name: &str, exact: bool) -> &'static str {
    if exact {
        "contracted-structure"
    } else if name.starts_with("ef-cont") {
        "ef-cont"
    } else if name.starts_with("cartan") {
        "contracted-cartan"
    } else if name.starts_with("serre-cont") {
        "serre-cont"
    } else {
        "standard-serre"
    }
}

fn run_case(cfg: &SuiteConfig, case: &Case, index: usize) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let p = cfg.profile;
    let mut ctx = Ctx {
        cfg,
        case,
        index,
        params: BTreeMap::new(),
        records: Vec::new(),
    };
    ctx.param("seed", cfg.seed.to_string());
    ctx.param("profile", format!("{},{}", p.m, p.n));
    ctx.param("sample", case.sample.to_string());
    if let Err(msg) = run_case_inner(&mut ctx, &mut rng) {
        ctx.error(default_check(&case.kind), msg);
    }
    ctx.records
}

type CaseResult = Result<(), String>;

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn run_case_inner(ctx: &mut Ctx<'_>, rng: &mut ChaCha8Rng) -> CaseResult {
    let cfg = ctx.cfg;
    let p = cfg.profile;
    let suite = ctx.case.suite;
    let tol = cfg.tolerance(suite);
    let q = sample_annulus(rng, cfg.q_modulus.0, cfg.q_modulus.1);
    ctx.cparam("q", q);
    let spectral = |rng: &mut ChaCha8Rng| sample_annulus(rng, 0.5, 2.0);
    match &ctx.case.kind {
        CaseKind::Ybe => {
            let (x1, x2, x3) = (spectral(rng), spectral(rng), spectral(rng));
            ctx.cparam("x1", x1);
            ctx.cparam("x2", x2);
            ctx.cparam("x3", x3);
            let r = check_graded_ybe(p, q, x1, x2, x3).map_err(e2s)?;
            ctx.record("ybe", "R12 R13 R23 = R23 R13 R12", r, tol, false);
            // (1|1) has no fundamental evaluation representation
            if (p.m, p.n) != (1, 1) && p.rank() >= 2 {
                let rep = fundamental_rep(p, x1).map_err(e2s)?;
                let rep_report = check_chevalley_relations(&rep, q).map_err(e2s)?;
                ctx.relations(&rep_report, tol, |_, _| "chevalley");
            }
        }
        CaseKind::Rll(set)
        | CaseKind::AppendixA(set)
        | CaseKind::Contracted(set)
        | CaseKind::Intertwining(set) => {
            let (x, y) = (spectral(rng), spectral(rng));
            ctx.param("index_set", format_set(set.members()));
            ctx.param("cutoff", cfg.cutoff.to_string());
            ctx.cparam("x", x);
            ctx.cparam("y", y);
            let space = FockSpace::new(set, cfg.cutoff).map_err(e2s)?;
            let pair = build_l_pair(set, &space, q).map_err(e2s)?;
            match &ctx.case.kind {
                CaseKind::Rll(_) => {
                    let r = check_rll_affine(&pair, x, y).map_err(e2s)?;
                    ctx.record("rll-affine", "R23 L13 L12 = L12 L13 R23", r, tol, false);
                    let fin = check_rll_finite(&pair).map_err(e2s)?;
                    ctx.relations(&fin, tol, |_, _| "rll-finite");
                }
                CaseKind::AppendixA(_) => {
                    let rep = check_appendix_a(&pair).map_err(e2s)?;
                    ctx.relations(&rep, tol, |_, exact| {
                        if exact {
                            "appendix-a-structure"
                        } else {
                            "appendix-a"
                        }
                    });
                }
                CaseKind::Contracted(_) => {
                    let rep = check_contracted_relations(&pair, x).map_err(e2s)?;
                    ctx.relations(&rep, tol, contracted_id);
                }
                _ => {
                    let rep = check_intertwining(&pair, x, y).map_err(e2s)?;
                    ctx.relations(&rep, tol, |_, _| "intertwining");
                }
            }
        }
        CaseKind::Osc(set) => {
            ctx.param("index_set", format_set(set.members()));
            ctx.param("cutoff", cfg.cutoff.to_string());
            let space = FockSpace::new(set, cfg.cutoff).map_err(e2s)?;
            let gens = GeneratorSet::new(&space, q).map_err(e2s)?;
            let rep = check_osc_relations(&gens).map_err(e2s)?;
            ctx.relations(&rep, tol, |_, _| "osc-relations");
            let modes = space.modes().to_vec();
            if !modes.is_empty() {
                let m = &modes[rng.gen_range(0..modes.len())];
                ctx.param("discrete_mode", format!("{},{}", m.i, m.a));
                let flipped = gens.apply_discrete_automorphism((m.i, m.a)).map_err(e2s)?;
                let rep = check_osc_relations(&flipped).map_err(e2s)?;
                for r in &rep.records {
                    ctx.record(
                        "osc-automorphism",
                        format!("discrete:{}", r.name),
                        r.residual,
                        tol,
                        r.exact,
                    );
                }
                let nm = modes.len();
                let mut params = OscAutomorphismParams::identity(nm);
                for a in 0..nm {
                    params.xi[a] = sample_annulus(rng, 0.5, 2.0);
                    for b in a..nm {
                        let v = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        params.eta[a][b] = v;
                        params.eta[b][a] = v;
                    }
                }
                ctx.param("automorphism_xi", join_complex(&params.xi));
                let eta: Vec<String> = params.eta.iter().map(|row| join_complex(row)).collect();
                ctx.param("automorphism_eta", eta.join(";"));
                let moved = gens.apply_osc_automorphism(&params).map_err(e2s)?;
                let rep = check_osc_relations(&moved).map_err(e2s)?;
                for r in &rep.records {
                    ctx.record(
                        "osc-automorphism",
                        format!("continuous:{}", r.name),
                        r.residual,
                        tol,
                        r.exact,
                    );
                }
            }
        }
        CaseKind::OneSite(set) => {
            ctx.param("index_set", format_set(set.members()));
            let twist = make_twist(cfg, q, 1, rng)?;
            let x = spectral(rng);
            let xi = match &cfg.xi {
                XiSpec::Values(v) => v[0],
                XiSpec::Random => spectral(rng),
            };
            ctx.param("z", join_complex(&twist.z));
            ctx.cparam("x", x);
            ctx.cparam("xi", xi);
            let lattice = LatticeConfig::new(vec![xi]).map_err(e2s)?;
            let lq = lattice_q(set, x, &lattice, &twist, q, &cfg.trace).map_err(e2s)?;
            ctx.param("trace_cutoff", lq.cutoff.to_string());
            let closed = one_site_q(set, x, xi, &twist, q).map_err(e2s)?;
            let closed = SparseOperator::diagonal(&[p.fundamental()], &closed);
            let diff = lq.matrix.sub(&closed).map_err(e2s)?.max_abs();
            let bound = tol.max(lq.change);
            ctx.record_full(
                "q-one-site",
                "traced vs closed form".into(),
                diff,
                bound,
                false,
                Some(lq.change),
                false,
            );
            let at_zero = one_site_q(set, real(0.0), xi, &twist, q).map_err(e2s)?;
            let r = at_zero.iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
            ctx.record("q-at-zero", "Q(0) = 1", r, 0.0, true);
        }
        CaseKind::Qq { base, i, j, sites } => {
            let (i, j, sites) = (*i, *j, *sites);
            ctx.param("base_set", format_set(base));
            ctx.param("i", i.to_string());
            ctx.param("j", j.to_string());
            ctx.param("sites", sites.to_string());
            let twist = make_twist(cfg, q, sites, rng)?;
            let lattice = make_lattice(cfg, sites, rng)?;
            let x = spectral(rng);
            ctx.param("z", join_complex(&twist.z));
            ctx.param("xi", join_complex(&lattice.xi));
            ctx.cparam("x", x);
            let opts = QqOptions {
                inverted_shift: cfg.inverted_shift,
                cutoff: cfg.trace,
            };
            let out =
                check_qq_relations(p, base, i, j, x, &twist, &lattice, q, &opts).map_err(e2s)?;
            let id = match out.kind {
                QqKind::SameParity => "qq-1",
                QqKind::MixedParity => "qq-2",
            };
            // closed forms at one site are held to the tighter bound
            let qtol = if sites == 1 { tol.min(1e-12) } else { tol };
            if out.cutoff > 0 {
                ctx.param("trace_cutoff", out.cutoff.to_string());
            }
            ctx.record_full(
                id,
                format!("L={sites}"),
                out.residual,
                qtol,
                false,
                None,
                !out.proven,
            );
        }
        CaseKind::Commutativity => {
            let sites = cfg.sites;
            let twist = make_twist(cfg, q, sites, rng)?;
            let lattice = make_lattice(cfg, sites, rng)?;
            let (x, y) = (spectral(rng), spectral(rng));
            ctx.param("z", join_complex(&twist.z));
            ctx.param("xi", join_complex(&lattice.xi));
            ctx.cparam("x", x);
            ctx.cparam("y", y);
            let tx = lattice_t_fundamental(x, &lattice, &twist, q).map_err(e2s)?;
            let ty = lattice_t_fundamental(y, &lattice, &twist, q).map_err(e2s)?;
            let r = commutator_residual(&tx, &ty).map_err(e2s)?;
            ctx.record("commute-tt", "[T(x), T(y)]", r, tol, false);
            let sets = cfg.resolved_index_sets().map_err(e2s)?;
            let mut qx = Vec::new();
            let mut qy = Vec::new();
            for set in &sets {
                qx.push(
                    lattice_q(set, x, &lattice, &twist, q, &cfg.trace)
                        .map_err(e2s)?
                        .matrix,
                );
                qy.push(
                    lattice_q(set, y, &lattice, &twist, q, &cfg.trace)
                        .map_err(e2s)?
                        .matrix,
                );
            }
            for (a, set) in sets.iter().enumerate() {
                let name = format_set(set.members());
                let r = commutator_residual(&tx, &qy[a]).map_err(e2s)?;
                ctx.record(
                    "commute-tq",
                    format!("[T(x), Q_{{{name}}}(y)]"),
                    r,
                    tol,
                    false,
                );
                for (b, other) in sets.iter().enumerate() {
                    let r = commutator_residual(&qx[a], &qy[b]).map_err(e2s)?;
                    let other = format_set(other.members());
                    ctx.record(
                        "commute-qq",
                        format!("[Q_{{{name}}}(x), Q_{{{other}}}(y)]"),
                        r,
                        tol,
                        false,
                    );
                }
            }
        }
        CaseKind::Series => {
            let r = rng.gen_range(0.3..0.6);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let twist = TwistParams::geometric(p, r, theta);
            ctx.param("z", join_complex(&twist.z));
            let series = verma_series_coefficients(&twist, 8);
            let oracle = closed_form_height_coefficients(&twist, 8, 64).map_err(e2s)?;
            for (d, (a, b)) in series.iter().zip(&oracle).enumerate() {
                ctx.record(
                    "character-series",
                    format!("degree {d}"),
                    (a - b).norm(),
                    tol,
                    false,
                );
            }
        }
        CaseKind::NormTrace(set) => {
            ctx.param("index_set", format_set(set.members()));
            let twist = make_twist(cfg, q, 1, rng)?;
            ctx.param("z", join_complex(&twist.z));
            ctx.param("cutoff", cfg.trace.max.to_string());
            let exact = normalization_z(set, &twist).map_err(e2s)?;
            let space = FockSpace::new(set, cfg.trace.max).map_err(e2s)?;
            let tr = normalization_z_trace(&space, &twist).map_err(e2s)?;
            // allow roundoff on top of the analytic tail
            let bound = tr.tail_bound + 1e-12 * exact.norm().max(1.0);
            let diff = (tr.value - exact).norm();
            ctx.record_full(
                "normalization-trace",
                "Str D = Z".into(),
                diff,
                bound,
                false,
                Some(tr.tail_bound),
                false,
            );
        }
        CaseKind::Factorization => {
            let twist = TwistParams::random_separated(p, q, 1, rng);
            let lambda: Vec<C64> = (0..p.rank())
                .map(|_| c64(rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5)))
                .collect();
            let (x, xi) = (spectral(rng), spectral(rng));
            ctx.param("z", join_complex(&twist.z));
            ctx.param("lambda", join_complex(&lambda));
            ctx.cparam("x", x);
            ctx.cparam("xi", xi);
            let r = check_verma_factorization(&lambda, x, xi, &twist, q).map_err(e2s)?;
            ctx.record(
                "verma-factorization",
                "T = Z+ Π Q_j",
                r,
                tol.min(1e-12),
                false,
            );
        }
        CaseKind::Kr(set) => {
            ctx.param("index_set", format_set(set.members()));
            let r: f64 = rng.gen_range(0.2..0.4);
            // largest moduli on I, as the limit requires
            let order: Vec<usize> = set
                .members()
                .iter()
                .copied()
                .chain(set.complement())
                .collect();
            let mut z = vec![real(0.0); p.rank()];
            for (rank, &k) in order.iter().enumerate() {
                z[k - 1] = C64::from_polar(
                    r.powi(rank as i32),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                );
            }
            let twist = TwistParams::new(p, z).map_err(e2s)?;
            ctx.param("z", join_complex(&twist.z));
            let ms: Vec<usize> = (1..=cfg.kr_m_max).collect();
            let table = check_kr_limit(set, &twist, &ms).map_err(e2s)?;
            if set.is_empty() || set.len() == p.rank() {
                let worst = table.rows.iter().map(|r| r.error).fold(0.0, f64::max);
                ctx.record("kr-limit", "trivial limit", worst, 1e-12, false);
            } else {
                let ratios = table.observed_ratios();
                let last = *ratios.last().expect("at least two m values");
                let dev = (last / table.predicted_ratio - 1.0).abs();
                ctx.param("predicted_ratio", format!("{:?}", table.predicted_ratio));
                ctx.param("observed_ratio", format!("{last:?}"));
                ctx.record("kr-limit", "error ratio vs prediction", dev, tol, false);
            }
        }
        CaseKind::Drinfeld => {
            for i in 1..p.rank() {
                let d = rng.gen_range(0..5usize);
                let lam_next = c64(rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5));
                let sp = if p.parity(i) == p.parity(i + 1) {
                    1.0
                } else {
                    -1.0
                };
                let mut lambda = vec![real(0.0); p.rank()];
                lambda[i] = lam_next;
                lambda[i - 1] = lam_next * sp + d as f64;
                let poly = drinfeld_polynomial(&lambda, i, p, q).map_err(e2s)?;
                let deg_err = (poly.len() as f64 - 1.0 - d as f64).abs() + (poly[0] - 1.0).norm();
                ctx.record(
                    "drinfeld-degree",
                    format!("i={i} d={d}"),
                    deg_err,
                    0.0,
                    true,
                );
                let x = spectral(rng);
                let si = p.sign(i) as f64;
                let a = (q.ln() * lam_next * (-2.0 * p.sign(i + 1) as f64)).exp();
                let shift = (q.ln() * (-2.0 * si)).exp();
                let lhs = poly_eval(&poly, x * shift) * (1.0 - x * a);
                let rhs = poly_eval(&poly, x) * (1.0 - x * a * shift.powi(d as i32));
                let r = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0);
                ctx.record(
                    "drinfeld-shift",
                    format!("i={i} d={d} x={}", format_complex(x)),
                    r,
                    tol,
                    false,
                );
            }
        }
        CaseKind::Vacuum(set) => {
            ctx.param("index_set", format_set(set.members()));
            ctx.param("cutoff", cfg.cutoff.to_string());
            let x = spectral(rng);
            ctx.cparam("x", x);
            let space = FockSpace::new(set, cfg.cutoff).map_err(e2s)?;
            let pair = build_l_pair(set, &space, q).map_err(e2s)?;
            let w = vacuum_highest_weight(&pair, x).map_err(e2s)?;
            let vtol = 1e-10f64.max(tol);
            ctx.relations(&w.report, vtol, |name, _| {
                if name == "drinfeld-ratio" {
                    "drinfeld-ratio"
                } else {
                    "vacuum-weight"
                }
            });
        }
    }
    Ok(())
}

fn make_twist(
    cfg: &SuiteConfig,
    q: C64,
    sites: usize,
    rng: &mut ChaCha8Rng,
) -> Result<TwistParams, String> {
    match &cfg.twist {
        TwistSpec::RandomConvergent => {
            Ok(TwistParams::random_separated(cfg.profile, q, sites, rng))
        }
        TwistSpec::Values(z) => TwistParams::new(cfg.profile, z.clone()).map_err(e2s),
    }
}

fn make_lattice(
    cfg: &SuiteConfig,
    sites: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LatticeConfig, String> {
    let xi = match &cfg.xi {
        XiSpec::Values(v) if v.len() >= sites => v[..sites].to_vec(),
        _ => (0..sites).map(|_| sample_annulus(rng, 0.7, 1.4)).collect(),
    };
    LatticeConfig::new(xi).map_err(e2s)
}

/// Runs every selected suite. Cases run on a rayon pool of `workers` threads
/// (`None`: rayon's default); the report is assembled in case order.
pub fn run_suite(cfg: &SuiteConfig, workers: Option<usize>) -> Result<Report, SuiteError> {
    cfg.validate()?;
    let cases = enumerate_cases(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SuiteError::Pool(e.to_string()))?;
    let results: Vec<(Vec<CheckRecord>, f64)> = pool.install(|| {
        cases
            .par_iter()
            .enumerate()
            .map(|(k, case)| {
                let t0 = Instant::now();
                let recs = run_case(cfg, case, k);
                (recs, t0.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut timing = Vec::new();
    for (k, (recs, ms)) in results.into_iter().enumerate() {
        timing.push(CaseTiming {
            case: k,
            suite: cases[k].suite,
            millis: ms,
        });
        records.extend(recs);
    }
    let mut summary: BTreeMap<Suite, SuiteSummary> = BTreeMap::new();
    for r in &records {
        let s = summary.entry(r.suite).or_default();
        s.total += 1;
        match r.status {
            Status::Pass => s.passed += 1,
            Status::Fail => s.failed += 1,
            Status::Finding => s.findings += 1,
        }
        s.max_residual = s.max_residual.max(r.residual.unwrap_or(f64::INFINITY));
    }
    let header = ReportHeader {
        schema: SCHEMA,
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        config: cfg.to_map(),
    };
    Ok(Report {
        header,
        records,
        summary,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5"), Some(real(1.5)));
        assert_eq!(parse_complex("0.3-0.2i"), Some(c64(0.3, -0.2)));
        assert_eq!(parse_complex("-2i"), Some(c64(0.0, -2.0)));
        assert_eq!(parse_complex("1e-3+2.5e-1i"), Some(c64(1e-3, 0.25)));
        assert_eq!(parse_complex("i"), Some(c64(0.0, 1.0)));
        assert_eq!(parse_complex("x"), None);
        let z = c64(0.1, -1.0 / 3.0);
        assert_eq!(parse_complex(&format_complex(z)), Some(z));
    }

    #[test]
    fn config_round_trip() {
        let text = "profile = 2,1\nindex_sets = -;1;2,3\nsuites = rll,qq\ntol.qq = 1e-6\nxi = 1.0+0.2i,0.9-0.1i\n";
        let cfg: SuiteConfig = text.parse().unwrap();
        assert_eq!(
            cfg.index_sets,
            IndexSetSpec::List(vec![vec![], vec![1], vec![2, 3]])
        );
        let echo: String = cfg
            .to_map()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        assert_eq!(echo.parse::<SuiteConfig>().unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            "profile 2,1".parse::<SuiteConfig>(),
            Err(ConfigError::Syntax { line: 1 })
        ));
        assert!(matches!(
            "profile = 2,1\nfoo = 1".parse::<SuiteConfig>(),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            "profile = 2,1\nsuites = nope".parse::<SuiteConfig>(),
            Err(ConfigError::UnknownSuite(_))
        ));
        assert!(matches!(
            "profile = 2,2\nindex_sets = 1,2".parse::<SuiteConfig>(),
            Err(ConfigError::UnsupportedIndexSet { .. })
        ));
        let ok: SuiteConfig = "profile = 2,2\nindex_sets = 1,2;1\nskip_unsupported = true"
            .parse()
            .unwrap();
        assert_eq!(ok.resolved_index_sets().unwrap().len(), 1);
        assert!(matches!(
            "profile = 2,2\nsuites = qq".parse::<SuiteConfig>(),
            Err(ConfigError::SuiteNotApplicable { .. })
        ));
    }

    #[test]
    fn registry_is_consistent() {
        for (k, c) in REGISTRY.iter().enumerate() {
            assert!(
                REGISTRY[..k].iter().all(|d| d.id != c.id),
                "duplicate id {}",
                c.id
            );
        }
        assert!(explain("qq-1").unwrap().contains("equal parities"));
        assert!(explain("rll-affine").unwrap().contains("affine RLL"));
        assert!(explain("nope").is_err());
    }
}
