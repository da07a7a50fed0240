//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line with its measurements.

use std::time::{Duration, Instant};

use blurlab::fock::LossParams;
use blurlab::report::Verdict;
use blurlab_cli::campaigns::{self, Ctx, QuantumPlan};
use blurlab_cli::config::{LoadedInputs, Params};
use blurlab_cli::report::Record;

const SEED: u64 = 20240611;

fn ctx<'a>(params: &'a Params, inputs: &'a LoadedInputs) -> Ctx<'a> {
    Ctx { params, seed: SEED, tol: None, inputs }
}

fn count(recs: &[Record], v: Verdict) -> usize {
    recs.iter().filter(|r| r.verdict == v).count()
}

fn failures(recs: &[Record]) -> Vec<String> {
    recs.iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .take(5)
        .map(|r| format!("{} (lhs {:e}, rhs {:e}; {})", r.name, r.lhs, r.rhs, r.detail))
        .collect()
}

/// Prints the criterion line and panics on failure.
fn conclude(id: u32, ok: bool, elapsed: Duration, limit: Option<Duration>, summary: String) {
    let in_time = limit.map_or(true, |l| elapsed <= l);
    let pass = ok && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs()));
    println!(
        "criterion {id}: {} {summary}; {:.1}s{budget}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {id} failed: {summary}");
    assert!(in_time, "criterion {id} exceeded its runtime limit: {:.1}s{budget}", elapsed.as_secs_f64());
}

#[test]
fn criterion_01_kraus_equivalence() {
    let t = Instant::now();
    let plan = QuantumPlan::acceptance();
    let (p, i) = (Params::default(), LoadedInputs::default());
    let recs = campaigns::kraus_equivalence(&plan, ctx(&p, &i)).unwrap();
    let configs = recs.iter().filter(|r| r.name.starts_with("kraus-equivalence")).count();
    let worst = recs
        .iter()
        .filter(|r| r.name.starts_with("kraus-equivalence"))
        .map(|r| r.lhs)
        .fold(0.0, f64::max);
    // (n, r) pairs for n <= 8 times two local dimensions
    let expected = 2 * (1..=8).map(|n| n + 1).sum::<usize>();
    let ok = count(&recs, Verdict::Fail) == 0 && configs == expected && worst <= 1e-10;
    conclude(
        1,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(120)),
        format!("{configs} configurations x 100 operators, worst trace-norm gap {worst:.2e}; {:?}", failures(&recs)),
    );
}

#[test]
fn criterion_02_oracle_equivalence() {
    let t = Instant::now();
    let plan = QuantumPlan::acceptance();
    let (p, i) = (Params::default(), LoadedInputs::default());
    let recs = campaigns::oracle_equivalence(&plan, ctx(&p, &i)).unwrap();
    let quantum: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("blur-")).collect();
    let ms: std::collections::BTreeSet<String> =
        quantum.iter().filter_map(|r| r.name.split("m=").nth(1).map(str::to_string)).collect();
    let kernel = recs.iter().find(|r| r.name == "classical-kernel-exact-oracle").expect("kernel record");
    let worst = quantum.iter().map(|r| r.lhs).fold(0.0, f64::max);
    let ok = count(&recs, Verdict::Fail) == 0
        && ms.len() == 3
        && worst <= 1e-10
        && kernel.verdict == Verdict::Pass
        && kernel.lhs == 0.0;
    conclude(
        2,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(300)),
        format!(
            "{} blurring records over m in {ms:?}, worst gap {worst:.2e}; classical kernel {}; {:?}",
            quantum.len(),
            kernel.detail,
            failures(&recs)
        ),
    );
}

#[test]
fn criterion_03_classical_blurring_lemma() {
    let t = Instant::now();
    let p = Params { instances: Some(200), n: Some(30), d: Some(3), ..Params::default() };
    let i = LoadedInputs::default();
    let recs = campaigns::classical_lemma(ctx(&p, &i)).unwrap();
    let lemma: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("blurring-lemma")).collect();
    let min_slack = lemma.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let vacuous = lemma.iter().filter(|r| r.verdict != Verdict::Pass && r.verdict != Verdict::Fail).count();
    let ok = lemma.len() == 200
        && lemma.iter().all(|r| r.verdict == Verdict::Pass)
        && min_slack >= -1e-8
        && count(&recs, Verdict::Fail) == 0;
    conclude(
        3,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(180)),
        format!("{} instances, min slack {min_slack:.3e}, {vacuous} not applicable; {:?}", lemma.len(), failures(&recs)),
    );
}

#[test]
fn criterion_04_classical_stein() {
    let t = Instant::now();
    let p = Params { instances: Some(50), n: Some(12), ..Params::default() };
    let i = LoadedInputs::default();
    let recs = campaigns::classical_stein(ctx(&p, &i)).unwrap();
    let inconclusive = count(&recs, Verdict::Inconclusive);
    let ok = recs.len() == 50 && count(&recs, Verdict::Fail) == 0 && inconclusive * 10 <= recs.len();
    conclude(
        4,
        ok,
        t.elapsed(),
        None,
        format!("{} instances, {} pass, {inconclusive} inconclusive; {:?}", recs.len(), count(&recs, Verdict::Pass), failures(&recs)),
    );
}

#[test]
fn criterion_05_hypergeometric() {
    let t = Instant::now();
    let p = Params { n: Some(40), ..Params::default() };
    let i = LoadedInputs::default();
    let recs = campaigns::hypergeometric(ctx(&p, &i)).unwrap();
    let want = [
        "hypergeometric-duality-swap",
        "hypergeometric-duality-complement",
        "hypergeometric-tail-basic",
        "hypergeometric-tail-tight",
        "hypergeometric-lower-bound",
    ];
    let present = want.iter().all(|w| recs.iter().any(|r| r.name == *w && r.detail.contains(" 0 violations")));
    let ok = present && count(&recs, Verdict::Fail) == 0 && recs.iter().all(|r| r.rhs <= 1e-12);
    let cases: Vec<String> = recs.iter().map(|r| format!("{}: {}", r.name, r.detail.split(';').next().unwrap_or(""))).collect();
    conclude(5, ok, t.elapsed(), None, format!("{cases:?}; {:?}", failures(&recs)));
}

#[test]
fn criterion_06_divergence_sandwich() {
    let t = Instant::now();
    let p = Params { instances: Some(100), ..Params::default() };
    let i = LoadedInputs::default();
    let recs = campaigns::divergences(ctx(&p, &i)).unwrap();
    let gated = [
        "relative-entropy-le-dmax",
        "datta-renner-sandwich-lower",
        "datta-renner-sandwich-upper",
        "weak-converse-lower",
        "weak-converse-upper",
        "positive-part-max-form",
        "positive-part-test-bound",
        "positive-part-min-form",
        "positive-part-monotone",
    ];
    let all_there = gated.iter().all(|g| {
        recs.iter().any(|r| r.name == *g && r.verdict == Verdict::Pass && r.detail.starts_with("100 cases, 0 violations"))
    });
    let ok = all_there && count(&recs, Verdict::Fail) == 0 && recs.iter().all(|r| r.verdict != Verdict::Pass || r.rhs <= 1e-8);
    conclude(6, ok, t.elapsed(), None, format!("{} families of 100 instances at 1e-8; {:?}", gated.len(), failures(&recs)));
}

#[test]
fn criterion_07_norm_lemmas() {
    let t = Instant::now();
    let plan = QuantumPlan::acceptance();
    let (p, i) = (Params::default(), LoadedInputs::default());
    let recs = campaigns::norm_lemmas(&plan, ctx(&p, &i)).unwrap();
    let find = |n: &str| recs.iter().find(|r| r.name == n).expect(n);
    let dr = find("d-r-bound");
    let on = find("output-norm-proposition");
    let tf = find("tail-filtering-lemma");
    let ok = count(&recs, Verdict::Fail) == 0 && tf.detail.contains("100/100 triples applicable");
    conclude(
        7,
        ok,
        t.elapsed(),
        None,
        format!("d_r bound [{}], output norm [{}], tail filtering [{}]", dr.detail, on.detail, tf.detail),
    );
}

#[test]
fn criterion_08_fock_convergence() {
    let t = Instant::now();
    let p = Params {
        d: Some(2),
        n_grid: Some(vec![40, 80, 160]),
        threshold: Some(0.05),
        cutoff: Some(3),
        ..Params::default()
    };
    let i = LoadedInputs::default();
    let mut recs = Vec::new();
    for delta in [0.25, 0.4] {
        let p = Params { delta: Some(delta), ..p.clone() };
        recs.extend(campaigns::fock_convergence(ctx(&p, &i)).unwrap());
    }
    let rows: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("e_n")).collect();
    let limit: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("limit-two-paths")).collect();
    let worst_final = rows.iter().filter(|r| r.name.ends_with("n=160")).map(|r| r.lhs).fold(0.0, f64::max);
    let worst_limit = limit.iter().map(|r| r.lhs).fold(0.0, f64::max);
    // 16 (h, k) pairs x 2 deltas x 3 rows
    let ok = rows.len() == 96 && limit.len() == 32 && count(&recs, Verdict::Fail) == 0 && worst_final < 0.05 && worst_limit <= 1e-12;
    // the loss parameters themselves
    let lp = LossParams::new(0.25).unwrap();
    let params_ok = (lp.lambda - 1.0 / (1.0 + 0.25 * 1.25)).abs() < 1e-15;
    conclude(
        8,
        ok && params_ok,
        t.elapsed(),
        Some(Duration::from_secs(600)),
        format!(
            "{} rows decreasing, worst e_160 {worst_final:.4}, worst limit mismatch {worst_limit:.1e}; {:?}",
            rows.len(),
            failures(&recs)
        ),
    );
}

#[test]
fn criterion_09_vacuum_support() {
    let t = Instant::now();
    let p = Params {
        instances: Some(20),
        cutoff: Some(12),
        big_delta: Some(0.5),
        nodes: Some(64),
        alpha: Some(2.0),
        delta: Some(0.3),
        ..Params::default()
    };
    let i = LoadedInputs::default();
    let recs = campaigns::vacuum_support(ctx(&p, &i)).unwrap();
    let states: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("vacuum-support")).collect();
    let coherent = recs.iter().find(|r| r.name.starts_with("coherent-counterexample")).expect("coherent record");
    let floor = 1.0 - (-LossParams::new(0.3).unwrap().lambda * 4.0).exp() - 0.02;
    let flagged = recs.iter().filter(|r| r.name.starts_with("quadrature") && r.verdict == Verdict::Inconclusive).count();
    let ok = states.len() == 20
        && states.iter().all(|r| r.verdict == Verdict::Pass)
        && coherent.verdict == Verdict::Pass
        && coherent.lhs >= floor
        && count(&recs, Verdict::Fail) == 0;
    conclude(
        9,
        ok,
        t.elapsed(),
        None,
        format!(
            "{} states below 0.05, coherent min {:.4} vs floor {floor:.4}, {flagged} quadrature flags; {:?}",
            states.iter().filter(|r| r.verdict == Verdict::Pass).count(),
            coherent.lhs,
            failures(&recs)
        ),
    );
}

#[test]
fn criterion_10_axioms() {
    let t = Instant::now();
    let (p, i) = (Params::default(), LoadedInputs::default());
    let recs = campaigns::axioms(ctx(&p, &i)).unwrap();
    let good: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("axiom")).collect();
    let broken: Vec<&Record> = recs.iter().filter(|r| r.name.starts_with("broken")).collect();
    let worst = good.iter().map(|r| r.lhs).fold(0.0, f64::max);
    let min_caught = broken.iter().map(|r| r.rhs).fold(f64::INFINITY, f64::min);
    let ok = good.len() == 10 && broken.len() == 4 && count(&recs, Verdict::Fail) == 0 && worst < 1e-8 && min_caught > 0.1;
    conclude(
        10,
        ok,
        t.elapsed(),
        None,
        format!("worst residual {worst:.1e} on good families, smallest broken residual {min_caught:.3}; {:?}", failures(&recs)),
    );
}

#[test]
fn criterion_11_gqsl_chain() {
    let t = Instant::now();
    let plan = QuantumPlan::acceptance();
    let p = Params { delta: Some(0.5), ..Params::default() };
    let i = LoadedInputs::default();
    let recs = campaigns::gqsl_chain(&plan, ctx(&p, &i)).unwrap();
    let ns: std::collections::BTreeSet<&str> =
        recs.iter().filter_map(|r| r.name.split_whitespace().nth(1)).collect();
    let ok = ns.len() == 3 && count(&recs, Verdict::Fail) == 0;
    conclude(
        11,
        ok,
        t.elapsed(),
        None,
        format!(
            "{} step checks over {ns:?}: {} pass, {} inconclusive; {:?}",
            recs.len(),
            count(&recs, Verdict::Pass),
            count(&recs, Verdict::Inconclusive),
            failures(&recs)
        ),
    );
}
