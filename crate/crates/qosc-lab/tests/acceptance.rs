//! Acceptance run: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so that the lines are always printed.

use std::time::{Duration, Instant};

use qosc_lab::graded_linalg::{ParityProfile, C64};
use qosc_lab::rmatrix::check_graded_ybe;
use qosc_lab::suite::{run_suite, IndexSetSpec, Report, Status, Suite, SuiteConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240917;

fn profiles(max_rank: usize) -> Vec<ParityProfile> {
    let mut out = Vec::new();
    for r in 1..=max_rank {
        for m in (0..=r).rev() {
            out.push(ParityProfile::new(m, r - m).unwrap());
        }
    }
    out
}

fn run(p: ParityProfile, suites: &[Suite], tweak: impl Fn(&mut SuiteConfig)) -> Report {
    let mut cfg = SuiteConfig::new(p).with_suites(suites);
    cfg.seed = SEED;
    tweak(&mut cfg);
    run_suite(&cfg, None).unwrap_or_else(|e| panic!("({},{}) {suites:?}: {e}", p.m, p.n))
}

/// Outcome of one criterion.
struct Verdict {
    ok: bool,
    detail: String,
}

/// Aggregates records with the given check ids (all ids when empty).
fn verdict(reports: &[Report], ids: &[&str]) -> Verdict {
    let mut n = 0;
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let mut exact = 0;
    for rep in reports {
        for r in rep
            .records
            .iter()
            .filter(|r| ids.is_empty() || ids.contains(&r.check))
        {
            n += 1;
            if r.exact {
                exact += 1;
            } else {
                worst = worst.max(r.residual.unwrap_or(f64::INFINITY));
            }
            if r.status == Status::Fail {
                bad.push(format!(
                    "{}:{} {:?}",
                    r.check,
                    r.relation,
                    r.params.get("profile")
                ));
            }
        }
    }
    let mut detail = format!("{n} records ({exact} exact), worst residual {worst:.2e}");
    if !bad.is_empty() {
        detail += &format!(
            "; failing: {}",
            bad.iter().take(5).cloned().collect::<Vec<_>>().join(", ")
        );
    }
    Verdict {
        ok: n > 0 && bad.is_empty(),
        detail,
    }
}

fn timed(v: Verdict, elapsed: Duration, limit: Duration) -> Verdict {
    let ok = v.ok && elapsed <= limit;
    Verdict {
        ok,
        detail: format!("{}; {:.2?} (limit {:?})", v.detail, elapsed, limit),
    }
}

fn criterion_1() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut sample = |lo: f64, hi: f64| {
        C64::from_polar(
            rng.gen_range(lo..hi),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    };
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in profiles(4) {
        for _ in 0..20 {
            let (q, x1, x2, x3) = (
                sample(0.3, 0.95),
                sample(0.5, 2.0),
                sample(0.5, 2.0),
                sample(0.5, 2.0),
            );
            worst = worst.max(check_graded_ybe(p, q, x1, x2, x3).unwrap());
            count += 1;
        }
    }
    let v = Verdict {
        ok: worst < 1e-12,
        detail: format!("{count} samples, worst residual {worst:.2e}"),
    };
    timed(v, t0.elapsed(), Duration::from_secs(10))
}

fn algebraic(suite: Suite, with_22: bool) -> Vec<Report> {
    let mut reports: Vec<Report> = profiles(3)
        .into_iter()
        .map(|p| {
            run(p, &[suite], |c| {
                c.q_samples = 10;
                c.cutoff = 6;
            })
        })
        .collect();
    if with_22 {
        let p = ParityProfile::new(2, 2).unwrap();
        reports.push(run(p, &[suite], |c| {
            c.q_samples = 10;
            c.cutoff = 6;
            c.index_sets = IndexSetSpec::List(vec![vec![1], vec![2], vec![3], vec![4]]);
        }));
    }
    reports
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();

    results.push((
        1,
        "graded YBE, 1 <= M+N <= 4, 20 samples each",
        criterion_1(),
    ));

    let t0 = Instant::now();
    let rll = algebraic(Suite::Rll, true);
    results.push((
        2,
        "affine RLL on all supported sets (M+N <= 3) and (2|2) singles",
        timed(
            verdict(&rll, &["rll-affine"]),
            t0.elapsed(),
            Duration::from_secs(120),
        ),
    ));

    let app = algebraic(Suite::AppendixA, true);
    results.push((
        3,
        "component relations and structural zeros",
        verdict(&app, &[]),
    ));

    let con: Vec<Report> = profiles(3)
        .into_iter()
        .map(|p| run(p, &[Suite::ContractedSerre], |_| {}))
        .collect();
    results.push((
        4,
        "contracted [e,f] and Serre-type relations (M+N <= 3)",
        verdict(&con, &[]),
    ));

    let int: Vec<Report> = profiles(3)
        .into_iter()
        .map(|p| run(p, &[Suite::Intertwining], |_| {}))
        .collect();
    results.push((
        5,
        "intertwining relations incl. degenerate branches",
        verdict(&int, &[]),
    ));

    let one: Vec<Report> = profiles(3)
        .into_iter()
        .map(|p| run(p, &[Suite::QOneSite], |_| {}))
        .collect();
    results.push((
        6,
        "traced one-site Q vs closed form (M+N <= 3)",
        verdict(&one, &["q-one-site"]),
    ));

    let t0 = Instant::now();
    let qq: Vec<Report> = profiles(3)
        .into_iter()
        .map(|p| run(p, &[Suite::Qq], |c| c.sites = 2))
        .collect();
    let elapsed = t0.elapsed();
    let l1: Vec<Report> = qq
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.records.retain(|x| x.relation == "L=1");
            r
        })
        .collect();
    let l2: Vec<Report> = qq
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.records.retain(|x| x.relation == "L=2");
            r
        })
        .collect();
    let (a, b) = (verdict(&l1, &[]), verdict(&l2, &[]));
    let findings: usize = qq
        .iter()
        .flat_map(|r| &r.records)
        .filter(|r| r.status == Status::Finding)
        .count();
    let v = Verdict {
        ok: a.ok && b.ok && findings == 0,
        detail: format!("L=1: {}; L=2: {}; findings {findings}", a.detail, b.detail),
    };
    results.push((
        7,
        "QQ-relations, L=1 (< 1e-12) and L=2 (< 1e-7)",
        timed(v, elapsed, Duration::from_secs(300)),
    ));

    let mut com = Vec::new();
    for sites in [1, 2] {
        for p in profiles(3) {
            com.push(run(p, &[Suite::Commutativity], |c| c.sites = sites));
        }
    }
    results.push((8, "[T,T], [T,Q], [Q,Q] at L = 1, 2", verdict(&com, &[])));

    let mut chars: Vec<Report> = profiles(3)
        .into_iter()
        .map(|p| run(p, &[Suite::Characters], |_| {}))
        .collect();
    for p in profiles(4).into_iter().filter(|p| p.n == 0) {
        chars.push(run(p, &[Suite::KrLimit], |c| c.kr_m_max = 12));
    }
    let parts: Vec<Verdict> = ["character-series", "normalization-trace", "kr-limit"]
        .iter()
        .map(|id| verdict(&chars, &[id]))
        .collect();
    let v = Verdict {
        ok: parts.iter().all(|v| v.ok),
        detail: format!(
            "series: {}; trace: {}; KR ratio deviation: {}",
            parts[0].detail, parts[1].detail, parts[2].detail
        ),
    };
    results.push((9, "supercharacter series, normalization trace, KR limit", v));

    results.push((
        10,
        "Verma factorization at one site, 20 draws per profile",
        verdict(&chars, &["verma-factorization"]),
    ));

    let default: SuiteConfig =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/default.conf"))
            .unwrap()
            .parse()
            .unwrap();
    let r1 = run_suite(&default, Some(1)).unwrap();
    let r2 = run_suite(&default, Some(4)).unwrap();
    let same = r1.body_json() == r2.body_json();
    results.push((
        11,
        "identical seed -> byte-identical report body",
        Verdict {
            ok: same && r1.passed(),
            detail: format!(
                "{} records, 1 vs 4 workers, default config passes: {}",
                r1.records.len(),
                r1.passed()
            ),
        },
    ));

    let mut all_ok = true;
    for (k, name, v) in &results {
        all_ok &= v.ok;
        println!(
            "criterion {k:>2}: {} — {name}: {}",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if !all_ok {
        std::process::exit(1);
    }
}
