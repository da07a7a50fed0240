//! Seeded campaigns behind each experiment. Every instance draws from its
//! own ChaCha stream, so results do not depend on the thread count.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use blurlab::classical_blurring::{
    check_blurring_lemma, check_classical_gsl, delta_n, exact_blur_kernel, random_blurring_instance,
    typicality_bound, typicality_mass,
};
use blurlab::divergences::{
    d_h, d_h_classical, d_max, d_max_smoothed_classical, d_max_to_hull, dtilde_max, dtilde_max_classical,
    dtilde_to_hull, rel_ent_to_hull, umegaki, HullOptions,
};
use blurlab::fock::{
    coherent_counterexample, convergence_study, damping, fock_dim, index_occupations, lift, lifted_blur,
    limit_channel, limit_operator, pure_loss, pure_loss_kraus, random_pure_fock, unlift, vacuum_support_experiment,
    FockOperator, LossParams,
};
use blurlab::free_sets::{broken_family, build_product_family, check_axioms, FreeFamily};
use blurlab::hypergeometric::{
    binary_entropy, bosonic_entropy, hyp_lower_bound, multivariate_pmf, multivariate_pmf_by_multinomials, pmf,
    tail_bounds, tail_mass,
};
use blurlab::linalg::{
    eigh, fidelity, partial_trace, positive_projector, purify_symmetric, random, sqrt_overlap, symmetrize,
    tensor_power, trace_distance, trace_norm, trace_positive_part, DenseOperator, StateVector, C64,
};
use blurlab::oracle::{naive_blur_q, naive_blur_with, naive_classical_kernel, naive_gamma, naive_partial_trace_tail};
use blurlab::quantum_blurring::{
    appended_sites, blur_q, blur_rho, check_d_r_bound, check_gqsl_chain, check_output_norm, check_tail_filtering,
    clear_low_block, gamma, kraus_family, random_tail_instance, sym_basis_vector, sym_overlap, sym_partial_trace,
    theta_family, ChainOptions, SymTypeOperator,
};
use blurlab::report::Verdict;
use blurlab::types::{enumerate_types, multinomial, multinomial_by_binomials, type_count, TypeVector};

use crate::config::{LoadedInputs, Params};
use crate::report::Record;

pub type CampaignResult = anyhow::Result<Vec<Record>>;

/// Everything a campaign needs.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub params: &'a Params,
    pub seed: u64,
    pub tol: Option<f64>,
    pub inputs: &'a LoadedInputs,
}

/// Independent stream `i` of the campaign seed.
pub fn instance_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64() * 1e3)
}

fn stamp(mut recs: Vec<Record>, ms: f64) -> Vec<Record> {
    let each = ms / recs.len().max(1) as f64;
    for r in &mut recs {
        r.runtime_ms = each;
    }
    recs
}

/// Running maximum with a violation count.
#[derive(Default)]
struct Sweep {
    worst: f64,
    cases: usize,
    violations: usize,
    where_worst: String,
}

impl Sweep {
    fn push(&mut self, residual: f64, tol: f64, label: impl FnOnce() -> String) {
        self.cases += 1;
        let bad = !(residual <= tol);
        if bad {
            self.violations += 1;
        }
        if residual > self.worst || (bad && self.violations == 1) {
            self.worst = residual;
            self.where_worst = label();
        }
    }

    fn merge(mut self, o: Sweep) -> Sweep {
        self.cases += o.cases;
        self.violations += o.violations;
        if o.worst > self.worst {
            self.worst = o.worst;
            self.where_worst = o.where_worst;
        }
        self
    }

    fn record(self, name: &str, tol: f64) -> Record {
        let mut r = Record::sweep(name, self.worst, tol, self.cases, self.violations);
        if !self.where_worst.is_empty() {
            r.detail = format!("{}; worst at {}", r.detail, self.where_worst);
        }
        r
    }
}

fn dirichlet(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn qubit_product_family(max_level: usize) -> anyhow::Result<FreeFamily> {
    let plus = StateVector::from_real(&[1.0, 1.0]).normalized()?;
    Ok(build_product_family(
        vec![
            DenseOperator::diagonal(&[1.0, 0.0]),
            DenseOperator::diagonal(&[0.0, 1.0]),
            DenseOperator::projector(&plus),
        ],
        max_level,
    )?)
}

/// Default qubit state for the chain and estimate campaigns.
pub fn default_qubit_state() -> DenseOperator {
    DenseOperator::projector(&StateVector::from_real(&[0.8f64.sqrt(), -(0.2f64.sqrt())]))
}

/// Runs the experiment with the given id.
pub fn run(id: &str, ctx: Ctx) -> CampaignResult {
    match id {
        "check-lemmas" => check_lemmas(ctx),
        "hypergeometric" => hypergeometric(ctx),
        "divergences" => divergences(ctx),
        "classical-lemma" => classical_lemma(ctx),
        "classical-stein" => classical_stein(ctx),
        "quantum-blurring" => quantum_blurring(ctx),
        "fock-convergence" => fock_convergence(ctx),
        "vacuum-support" => vacuum_support(ctx),
        "axioms" => axioms(ctx),
        "stein-estimate" => stein_estimate(ctx),
        other => anyhow::bail!("unknown experiment {other:?}"),
    }
}

// ---------------------------------------------------------------------------
// hypergeometric and types

/// Duality, normalisation and tails for `N <= n` (default 40); the lower
/// bound for `N <= min(n, 24)`, `|X| <= 3`, draws up to 12.
pub fn hypergeometric(ctx: Ctx) -> CampaignResult {
    let big_n = ctx.params.n.unwrap_or(40);
    let tol = ctx.tol.unwrap_or(1e-12);
    let (recs, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
        let mut out = Vec::new();

        let per_n: Vec<(Sweep, Sweep, Sweep, Sweep, Sweep)> = (0..=big_n)
            .into_par_iter()
            .map(|total| -> anyhow::Result<_> {
                let (mut swap, mut flip, mut norm, mut basic, mut tight) =
                    (Sweep::default(), Sweep::default(), Sweep::default(), Sweep::default(), Sweep::default());
                for marked in 0..=total {
                    for draws in 0..=total {
                        let mut sum = 0.0;
                        for hits in 0..=draws {
                            let a = pmf(total, marked, draws, hits)?;
                            sum += a;
                            let b = if hits <= marked { pmf(total, draws, marked, hits)? } else { 0.0 };
                            let c = pmf(total, total - marked, draws, draws - hits)?;
                            swap.push((a - b).abs(), tol, || format!("({total},{marked},{draws},{hits})"));
                            flip.push((a - c).abs(), tol, || format!("({total},{marked},{draws},{hits})"));
                        }
                        norm.push((sum - 1.0).abs(), tol, || format!("({total},{marked},{draws})"));
                        if draws == 0 {
                            continue;
                        }
                        for u in [0.05, 0.1, 0.2, 0.3, 0.5] {
                            let mass = tail_mass(total, marked, draws, u)?;
                            let b = tail_bounds(total, marked, draws, u)?;
                            basic.push(mass - b.basic, tol, || format!("({total},{marked},{draws},u={u})"));
                            if let Some(t) = b.tight {
                                tight.push(mass - t, tol, || format!("({total},{marked},{draws},u={u})"));
                            }
                        }
                    }
                }
                Ok((swap, flip, norm, basic, tight))
            })
            .collect::<anyhow::Result<_>>()?;
        let mut acc: [Sweep; 5] = Default::default();
        for (a, b, c, d, e) in per_n {
            let parts = [a, b, c, d, e];
            for (slot, s) in acc.iter_mut().zip(parts) {
                *slot = std::mem::take(slot).merge(s);
            }
        }
        let [swap, flip, norm, basic, tight] = acc;
        out.push(swap.record("hypergeometric-duality-swap", tol));
        out.push(flip.record("hypergeometric-duality-complement", tol));
        out.push(norm.record("hypergeometric-normalisation", tol));
        out.push(basic.record("hypergeometric-tail-basic", tol));
        out.push(tight.record("hypergeometric-tail-tight", tol));

        // lower-bound lemma
        let lb_max = big_n.min(24);
        let lb: Vec<Sweep> = (1..=lb_max)
            .into_par_iter()
            .map(|total| -> anyhow::Result<Sweep> {
                let mut s = Sweep::default();
                for alphabet in 1..=3 {
                    for urn in enumerate_types(total, alphabet)? {
                        for draws in 1..=total.min(12) {
                            for draw in enumerate_types(draws, alphabet)? {
                                if draw.counts().iter().zip(urn.counts()).any(|(a, b)| a > b) {
                                    continue;
                                }
                                let p = multivariate_pmf(&urn, &draw)?;
                                let bound = hyp_lower_bound(&urn, &draw)?;
                                s.push(bound - p, tol, || format!("urn {:?} draw {:?}", urn.counts(), draw.counts()));
                            }
                        }
                    }
                }
                Ok(s)
            })
            .collect::<anyhow::Result<_>>()?;
        out.push(lb.into_iter().fold(Sweep::default(), Sweep::merge).record("hypergeometric-lower-bound", tol));

        // multivariate law: normalisation and the multinomial form
        let mv: Vec<(Sweep, Sweep)> = (1..=big_n.min(20))
            .into_par_iter()
            .map(|total| -> anyhow::Result<(Sweep, Sweep)> {
                let (mut norm, mut forms) = (Sweep::default(), Sweep::default());
                for alphabet in 2..=3 {
                    for urn in enumerate_types(total, alphabet)? {
                        for draws in 0..=total.min(10) {
                            let mut sum = 0.0;
                            for draw in enumerate_types(draws, alphabet)? {
                                let a = multivariate_pmf(&urn, &draw)?;
                                let b = multivariate_pmf_by_multinomials(&urn, &draw)?;
                                sum += a;
                                forms.push((a - b).abs(), tol, || format!("urn {:?} draw {:?}", urn.counts(), draw.counts()));
                            }
                            norm.push((sum - 1.0).abs(), tol, || format!("urn {:?} n={draws}", urn.counts()));
                        }
                    }
                }
                Ok((norm, forms))
            })
            .collect::<anyhow::Result<_>>()?;
        let (norm, forms) = mv
            .into_iter()
            .fold((Sweep::default(), Sweep::default()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));
        out.push(norm.record("multivariate-normalisation", tol));
        out.push(forms.record("multivariate-multinomial-form", tol));

        // g identity
        let mut g = Sweep::default();
        for i in 1..=400 {
            let x = i as f64 * 0.05;
            let lhs = bosonic_entropy(x);
            let rhs = (1.0 + x) * binary_entropy(1.0 / (1.0 + x));
            g.push((lhs - rhs).abs(), tol * (1.0 + lhs), || format!("x={x}"));
        }
        out.push(g.record("bosonic-entropy-identity", tol));

        out.extend(type_counting(12, 4)?);
        Ok(out)
    });
    Ok(stamp(recs?, ms))
}

/// `|T_n| = C(n+k-1, k-1)`; `sum_t multinomial(t) = k^n`; two multinomial forms agree.
fn type_counting(max_n: usize, max_k: usize) -> anyhow::Result<Vec<Record>> {
    let (mut count, mut total, mut forms) = (Sweep::default(), Sweep::default(), Sweep::default());
    for k in 1..=max_k {
        for n in 0..=max_n {
            let types = enumerate_types(n, k)?;
            let expect = blurlab::types::binomial_big(n + k - 1, k - 1);
            let ok = BigUint::from(types.len()) == expect && type_count(n, k) == expect;
            count.push(if ok { 0.0 } else { 1.0 }, 0.0, || format!("n={n} k={k}"));
            if n <= 8 && k <= 3 {
                let sum: BigUint = types.iter().map(multinomial).sum();
                let ok = sum == BigUint::from(k).pow(n as u32);
                total.push(if ok { 0.0 } else { 1.0 }, 0.0, || format!("n={n} k={k}"));
            }
            for t in &types {
                let ok = multinomial(t) == multinomial_by_binomials(t);
                forms.push(if ok { 0.0 } else { 1.0 }, 0.0, || format!("{:?}", t.counts()));
            }
        }
    }
    Ok(vec![
        count.record("type-count", 0.0),
        total.record("type-class-sizes-sum", 0.0),
        forms.record("multinomial-forms", 0.0),
    ])
}

// ---------------------------------------------------------------------------
// divergences

/// Default 100 instances per family; tolerance 1e-8.
pub fn divergences(ctx: Ctx) -> CampaignResult {
    let count = ctx.params.instances.unwrap_or(100);
    let tol = ctx.tol.unwrap_or(1e-8);
    let (recs, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
        let seed = ctx.seed;
        type Row = [(f64, String); 12];
        let rows: Vec<Row> = (0..count)
            .into_par_iter()
            .map(|i| -> anyhow::Result<Row> {
                let mut rng = instance_rng(seed, i as u64);
                let label = |s: &str| format!("instance {i} {s}");
                let dim = rng.gen_range(2..=4);
                let rho = random::density(dim, &mut rng);
                let sigma = random::density(dim, &mut rng);
                let eps: f64 = rng.gen_range(0.01..0.5);

                // D <= D_max
                let dd = umegaki(&rho, &sigma)?.value - d_max(&rho, &sigma)?.value;

                // D_H weak duality over a threshold grid
                let beta = (-d_h(&rho, &sigma, eps)?.value).exp2();
                let mut wd = f64::NEG_INFINITY;
                for j in 0..40 {
                    let t = 2f64.powf(-4.0 + j as f64 * 0.25);
                    let lb = (1.0 - eps - trace_positive_part(&rho.sub(&sigma.scale(t))?)?) / t;
                    wd = wd.max(lb - beta);
                }

                // Dtilde <= D_max (quantum, eps = 0 collapses)
                let dt = dtilde_max(&rho, &sigma, eps)?.value - d_max(&rho, &sigma)?.value;

                // classical pair
                let k = rng.gen_range(2..=6);
                let p = dirichlet(k, &mut rng);
                let q = dirichlet(k, &mut rng);
                let eta: f64 = rng.gen_range(0.01..(1.0 - eps).min(0.5));
                let e2 = (eps * (2.0 - eps)).sqrt();
                let dmax_e = d_max_smoothed_classical(&p, &q, eps)?.value;
                let dtil_e = dtilde_max_classical(&p, &q, eps)?.value;
                let sandwich_lo = dtil_e - dmax_e;
                let sandwich_hi = if e2 < 1.0 {
                    d_max_smoothed_classical(&p, &q, e2)?.value - (dtil_e - (1.0 - eps).log2())
                } else {
                    f64::NEG_INFINITY
                };
                let displayed = if e2 < 1.0 {
                    dmax_e - (dtilde_max_classical(&p, &q, e2)?.value - (1.0 - eps).log2())
                } else {
                    f64::NEG_INFINITY
                };
                // weak-converse duality chain
                let dh_loose = d_h_classical(&p, &q, 1.0 - eps - eta)?.value;
                let dh_tight = d_h_classical(&p, &q, 1.0 - eps)?.value;
                let wc_lo = dh_loose + eta.log2() - dmax_e;
                let wc_hi = dmax_e - dh_tight;

                // positive part: max form, min form and monotonicity
                let x = random::hermitian(dim, &mut rng);
                let tp = trace_positive_part(&x)?;
                let proj = positive_projector(&x)?;
                let max_form = (proj.hs_inner(&x) - tp).abs();
                let mut q_gap = f64::NEG_INFINITY;
                for _ in 0..5 {
                    // random 0 <= Q <= 1
                    let h = random::hermitian(dim, &mut rng);
                    let sp = eigh(&h)?;
                    let (lo, hi) = (sp.min(), sp.max());
                    let qop = sp.map(|l| if hi > lo { (l - lo) / (hi - lo) } else { 0.5 });
                    q_gap = q_gap.max(qop.hs_inner(&x) - tp);
                }
                let xp = eigh(&x)?.map(|l| l.max(0.0));
                let min_form = eigh(&xp.sub(&x)?)?.min().min(eigh(&xp)?.min());
                let psd = random::density(dim, &mut rng);
                let mono = tp - trace_positive_part(&x.add(&psd)?)?;
                // channel monotonicity under a partial trace
                let y = random::hermitian(4, &mut rng);
                let chan = trace_positive_part(&partial_trace(&y, &[2, 2], &[1])?)? - trace_positive_part(&y)?;
                Ok([
                    (dd, label("D-le-Dmax")),
                    (wd, label("DH-weak-duality")),
                    (dt, label("Dtilde-le-Dmax")),
                    (sandwich_lo, label("sandwich-lower")),
                    (sandwich_hi, label("sandwich-upper")),
                    (displayed, label("sandwich-displayed")),
                    (wc_lo, label("weak-converse-lower")),
                    (wc_hi, label("weak-converse-upper")),
                    (max_form, label("positive-part-max-form")),
                    (q_gap, label("positive-part-test-bound")),
                    (-min_form, label("positive-part-min-form")),
                    (mono.max(chan), label("positive-part-monotone")),
                ])
            })
            .collect::<anyhow::Result<_>>()?;
        let names = [
            "relative-entropy-le-dmax",
            "hypothesis-testing-weak-duality",
            "dtilde-le-dmax",
            "datta-renner-sandwich-lower",
            "datta-renner-sandwich-upper",
            "",
            "weak-converse-lower",
            "weak-converse-upper",
            "positive-part-max-form",
            "positive-part-test-bound",
            "positive-part-min-form",
            "positive-part-monotone",
        ];
        let mut out = Vec::new();
        for (col, name) in names.iter().enumerate() {
            let mut s = Sweep::default();
            for row in &rows {
                s.push(row[col].0, tol, || row[col].1.clone());
            }
            if col == 5 {
                let mut r = Record::new("datta-renner-displayed-form", Verdict::Inapplicable, s.worst, tol);
                r.detail = format!(
                    "diagnostic: displayed placement violated on {}/{} instances (standard placement is checked above)",
                    s.violations, s.cases
                );
                out.push(r);
            } else {
                out.push(s.record(name, tol));
            }
        }
        out.extend(fidelity_checks(count.min(50), seed ^ 0xF1DE, tol)?);
        Ok(out)
    });
    Ok(stamp(recs?, ms))
}

/// Overlap bounds and symmetric purifications.
fn fidelity_checks(count: usize, seed: u64, tol: f64) -> anyhow::Result<Vec<Record>> {
    let (mut hol, mut fvdg_lo, mut fvdg_hi, mut purif) =
        (Sweep::default(), Sweep::default(), Sweep::default(), Sweep::default());
    for i in 0..count {
        let mut rng = instance_rng(seed, i as u64);
        let dim = rng.gen_range(2..=4);
        let rho = random::density(dim, &mut rng);
        let sigma = random::density(dim, &mut rng);
        let td = trace_distance(&rho, &sigma)?;
        let f = fidelity(&rho, &sigma)?;
        let ov = sqrt_overlap(&rho, &sigma)?;
        hol.push(1.0 - td - ov, tol, || format!("instance {i}"));
        fvdg_lo.push(1.0 - f - td, tol, || format!("instance {i}"));
        fvdg_hi.push(td - (1.0 - f * f).max(0.0).sqrt(), tol, || format!("instance {i}"));
        // symmetric purifications of permutation-invariant two-copy states
        let a = symmetrize(&random::density(4, &mut rng), 2, 2)?;
        let b = symmetrize(&random::density(4, &mut rng), 2, 2)?;
        let pa = purify_symmetric(&a, 2, 2)?;
        let pb = purify_symmetric(&b, 2, 2)?;
        let inner = pa.inner(&pb).re;
        let resid = (inner - sqrt_overlap(&a, &b)?).abs().max(1.0 - trace_distance(&a, &b)? - inner);
        purif.push(resid, tol, || format!("instance {i}"));
    }
    Ok(vec![
        hol.record("overlap-ge-one-minus-trace-distance", tol),
        fvdg_lo.record("fuchs-van-de-graaf-lower", tol),
        fvdg_hi.record("fuchs-van-de-graaf-upper", tol),
        purif.record("symmetric-purification-overlap", tol),
    ])
}

// ---------------------------------------------------------------------------
// classical

/// Default 200 instances with `n <= 30`, `|X| <= 3`.
pub fn classical_lemma(ctx: Ctx) -> CampaignResult {
    let count = ctx.params.instances.unwrap_or(200);
    let max_n = ctx.params.n.unwrap_or(30);
    let max_alphabet = ctx.params.d.unwrap_or(3);
    let seed = ctx.seed;
    let mut out: Vec<Record> = (0..count)
        .into_par_iter()
        .map(|i| -> anyhow::Result<Record> {
            let (r, ms) = timed(|| -> anyhow::Result<Record> {
                let mut rng = instance_rng(seed, i as u64);
                let (p_n, q_n, s, delta, eta) = random_blurring_instance(&mut rng, max_n, max_alphabet)?;
                let c = check_blurring_lemma(&p_n, &q_n, &s, delta, eta)?;
                Ok(Record::new(format!("blurring-lemma instance {i}"), c.verdict, c.lhs, c.rhs).detail(format!(
                    "n {}, |X| {}, m {}, delta {:.4}, eta {:.4}, concentration {:.6}",
                    c.n, c.alphabet, c.m, c.delta, c.eta, c.concentration
                )))
            });
            let mut r = r?;
            r.runtime_ms = ms;
            Ok(r)
        })
        .collect::<anyhow::Result<_>>()?;
    // concentration step
    let mut conc = Sweep::default();
    let mut dn = Sweep::default();
    for i in 0..20u64 {
        let mut rng = instance_rng(seed ^ 0xC0C0, i);
        let k = rng.gen_range(2..=3);
        let n = rng.gen_range(5..=max_n.max(5));
        let p = dirichlet(k, &mut rng);
        let eta: f64 = rng.gen_range(0.01..0.5);
        let delta = delta_n(n, k, eta)?;
        let miss = 1.0 - typicality_mass(&p, n, delta)?;
        conc.push(miss - eta, 1e-12, || format!("n={n} |X|={k} eta={eta:.3}"));
        // the bound at delta_n equals eta^{|X|} <= eta
        let at = typicality_bound(k, n, delta);
        dn.push((at - eta.powi(k as i32)).abs() / eta.powi(k as i32) + (at - eta).max(0.0), 1e-9, || {
            format!("n={n} |X|={k}")
        });
    }
    out.push(conc.record("concentration-at-delta-n", 1e-12));
    out.push(dn.record("delta-n-solves-bound", 1e-9));
    Ok(out)
}

/// Default 50 instances with `n <= 12`, two diagonal level-1 generators.
pub fn classical_stein(ctx: Ctx) -> CampaignResult {
    let count = ctx.params.instances.unwrap_or(50);
    let max_n = ctx.params.n.unwrap_or(12);
    let seed = ctx.seed;
    (0..count)
        .into_par_iter()
        .map(|i| -> anyhow::Result<Record> {
            let (r, ms) = timed(|| -> anyhow::Result<Record> {
                let mut rng = instance_rng(seed, i as u64);
                let k = rng.gen_range(2..=3);
                let n = rng.gen_range(2..=max_n.max(2));
                let p = dirichlet(k, &mut rng);
                let gens: Vec<DenseOperator> = (0..2)
                    .map(|_| {
                        let g: Vec<f64> = dirichlet(k, &mut rng).iter().map(|x| 0.8 * x + 0.2 / k as f64).collect();
                        DenseOperator::diagonal(&g)
                    })
                    .collect();
                let family = build_product_family(gens, 1)?;
                let eps = ctx.params.eps.unwrap_or_else(|| rng.gen_range(0.05..0.3));
                let eta = ctx.params.eta.unwrap_or_else(|| rng.gen_range(0.05..0.3));
                let c = check_classical_gsl(&p, &family, n, eps, eta)?;
                Ok(Record::bracketed(
                    format!("classical-stein instance {i}"),
                    c.verdict,
                    c.lhs,
                    c.smoothed_eps.shift(c.log_term + c.g_term + c.c_term),
                )
                .detail(format!("n {n}, |X| {k}, eps {eps:.3}, eta {eta:.3}, c {:.4}", c.c)))
            });
            let mut r = r?;
            r.runtime_ms = ms;
            Ok(r)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// quantum blurring

/// Knobs of the quantum-blurring campaign.
#[derive(Clone, Debug)]
pub struct QuantumPlan {
    pub kraus_max_n: usize,
    pub kraus_dims: Vec<usize>,
    pub kraus_instances: usize,
    pub oracle_max_n: usize,
    pub oracle_instances: usize,
    pub classical_oracle: (usize, usize),
    pub norm_max_n: usize,
    pub tail_instances: usize,
    pub chain_max_n: usize,
}

impl QuantumPlan {
    fn from_params(p: &Params) -> Self {
        let n = p.n.unwrap_or(6);
        Self {
            kraus_max_n: n,
            kraus_dims: p.d.map_or(vec![2, 3], |d| vec![d]),
            kraus_instances: p.instances.unwrap_or(10),
            oracle_max_n: n.min(4),
            oracle_instances: 3,
            classical_oracle: (n.min(6), 3),
            norm_max_n: (2 * n).min(20),
            tail_instances: p.instances.unwrap_or(10).max(10),
            chain_max_n: n.min(3),
        }
    }

    /// Sizes of the acceptance suite.
    pub fn acceptance() -> Self {
        Self {
            kraus_max_n: 8,
            kraus_dims: vec![2, 3],
            kraus_instances: 100,
            oracle_max_n: 4,
            oracle_instances: 5,
            classical_oracle: (6, 3),
            norm_max_n: 20,
            tail_instances: 100,
            chain_max_n: 3,
        }
    }
}

pub fn quantum_blurring(ctx: Ctx) -> CampaignResult {
    quantum_blurring_with(&QuantumPlan::from_params(ctx.params), ctx)
}

pub fn quantum_blurring_with(plan: &QuantumPlan, ctx: Ctx) -> CampaignResult {
    let mut out = Vec::new();
    out.extend(kraus_equivalence(plan, ctx)?);
    out.extend(oracle_equivalence(plan, ctx)?);
    out.extend(norm_lemmas(plan, ctx)?);
    out.extend(gqsl_chain(plan, ctx)?);
    Ok(out)
}

/// `||Gamma_{n,r}(X) - sum_w M X M^dagger||_1 <= 1e-10` and `Theta` is trace preserving.
pub fn kraus_equivalence(plan: &QuantumPlan, ctx: Ctx) -> CampaignResult {
    let configs: Vec<(usize, usize, usize)> = plan
        .kraus_dims
        .iter()
        .flat_map(|&d| (1..=plan.kraus_max_n).flat_map(move |n| (0..=n).map(move |r| (n, r, d))))
        .collect();
    let seed = ctx.seed;
    let instances = plan.kraus_instances;
    configs
        .par_iter()
        .enumerate()
        .map(|(ci, &(n, r, d))| -> anyhow::Result<Vec<Record>> {
            let (recs, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
                let fam = kraus_family(n, r, d)?;
                let mut rng = instance_rng(seed, ci as u64);
                let mut s = Sweep::default();
                for j in 0..instances {
                    let x = SymTypeOperator::random_hermitian(n, d, &mut rng)?;
                    let diff = gamma(r, &x)?.sub(&fam.apply(&x)?)?.trace_norm();
                    s.push(diff, 1e-10, || format!("X #{j}"));
                }
                let theta = theta_family(n, r, d)?;
                let gram = theta.gram();
                let id_err = (gram - nalgebra::DMatrix::<f64>::identity(theta.dim, theta.dim)).amax();
                Ok(vec![
                    s.record(&format!("kraus-equivalence n={n} r={r} d={d}"), 1e-10),
                    Record::le(format!("theta-trace-preserving n={n} r={r} d={d}"), id_err, 0.0, 1e-10),
                ])
            });
            Ok(stamp(recs?, ms))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Fast paths against the naive full-tensor and sequence-level oracles.
pub fn oracle_equivalence(plan: &QuantumPlan, ctx: Ctx) -> CampaignResult {
    let mut out = Vec::new();
    let tol = 1e-10;
    for n in 1..=plan.oracle_max_n {
        // delta values realising every reachable floor(delta n) in {0, 1, 2}
        let mut deltas: BTreeMap<usize, f64> = BTreeMap::new();
        for m in 0..=2usize {
            let delta = if m == 0 { 0.5 / (n as f64 + 1.0) } else { m as f64 / n as f64 };
            if delta <= 0.5 && appended_sites(n, delta) == m {
                deltas.insert(m, delta);
            }
        }
        for (&m, &delta) in &deltas {
            let (rec, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
                let mut rng = instance_rng(ctx.seed ^ 0x0AC1E, (n * 8 + m) as u64);
                let (mut q, mut rr, mut g) = (Sweep::default(), Sweep::default(), Sweep::default());
                for j in 0..plan.oracle_instances {
                    let x = SymTypeOperator::random_hermitian(n, 2, &mut rng)?;
                    let fast = blur_q(delta, &x)?;
                    let slow = naive_blur_q(m, &x)?;
                    q.push(fast.sub(&slow)?.trace_norm(), tol, || format!("X #{j}"));
                    let rho = random::density(2, &mut rng);
                    let y = random::hermitian(1 << n, &mut rng);
                    let fast = blur_rho(n, delta, &rho, &y)?;
                    let slow = naive_blur_with(n, m, &rho, &y)?;
                    rr.push(trace_norm(&fast.sub(&slow)?), tol, || format!("X #{j}"));
                    for r in 0..=n {
                        g.push(gamma(r, &x)?.sub(&naive_gamma(r, &x)?)?.trace_norm(), tol, || format!("r={r} X #{j}"));
                    }
                }
                Ok(vec![
                    q.record(&format!("blur-q-oracle n={n} m={m}"), tol),
                    rr.record(&format!("blur-rho-oracle n={n} m={m}"), tol),
                    g.record(&format!("gamma-oracle n={n} m={m}"), tol),
                ])
            });
            out.extend(stamp(rec?, ms));
        }
    }
    let (max_n, max_m) = plan.classical_oracle;
    let (rec, ms) = timed(|| -> anyhow::Result<Record> {
        let mut s = Sweep::default();
        for n in 1..=max_n {
            for m in 0..=max_m {
                let fast = exact_blur_kernel(n, m, 2)?;
                let slow = naive_classical_kernel(n, m, 2)?;
                s.push(if fast == slow { 0.0 } else { 1.0 }, 0.0, || format!("n={n} m={m}"));
            }
        }
        Ok(s.record("classical-kernel-exact-oracle", 0.0))
    });
    out.push(stamp(vec![rec?], ms).remove(0));
    // type-basis lemmas at small n against the tensor picture
    let (rec, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
        let (mut ov, mut pt) = (Sweep::default(), Sweep::default());
        let mut rng = instance_rng(ctx.seed ^ 0x7E45, 0);
        for n in 1..=4usize {
            for d in 2..=3usize {
                for t in enumerate_types(n, d)? {
                    let full = sym_basis_vector(n, &t, d)?;
                    for r in 1..=n {
                        for w in enumerate_types(r, d)? {
                            let (coef, _) = sym_overlap(r, &w, n, &t)?;
                            // <x^r| ⊗ 1 applied to |n,t>, norm of the contraction
                            let x_idx = representative_index(&w, d);
                            let tail = d.pow((n - r) as u32);
                            let block: f64 = (0..tail).map(|e| full.amplitudes()[x_idx * tail + e].norm_sqr()).sum();
                            ov.push((coef - block.sqrt()).abs(), 1e-12, || format!("n={n} t={:?} w={:?}", t.counts(), w.counts()));
                        }
                    }
                }
                let x = SymTypeOperator::random_hermitian(n, d, &mut rng)?;
                for r in 0..=n {
                    let fast = sym_partial_trace(r, &x)?;
                    let tensor_x = x.to_tensor()?;
                    let slow = naive_partial_trace_tail(&tensor_x, d, n, r)?;
                    let slow = SymTypeOperator::from_tensor(n - r, d, &slow)?;
                    pt.push(fast.sub(&slow)?.trace_norm(), 1e-10, || format!("n={n} d={d} r={r}"));
                }
            }
        }
        Ok(vec![ov.record("type-basis-overlap", 1e-12), pt.record("partial-trace-lemma", 1e-10)])
    });
    out.extend(stamp(rec?, ms));
    Ok(out)
}

/// Index of the sorted sequence `0^{w_0} 1^{w_1} ...`.
fn representative_index(w: &TypeVector, d: usize) -> usize {
    let mut idx = 0;
    for (x, &c) in w.counts().iter().enumerate() {
        for _ in 0..c {
            idx = idx * d + x;
        }
    }
    idx
}

/// d_r bound, output-norm proposition and the tail-filtering lemma.
pub fn norm_lemmas(plan: &QuantumPlan, ctx: Ctx) -> CampaignResult {
    let mut out = Vec::new();
    let (rec, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
        let rows: Vec<(Sweep, Sweep)> = (1..=plan.norm_max_n)
            .into_par_iter()
            .map(|n| -> anyhow::Result<(Sweep, Sweep)> {
                let (mut dr, mut on) = (Sweep::default(), Sweep::default());
                for r in 0..=n {
                    for occ in 0..=n {
                        let c = check_d_r_bound(n, r, 2, occ)?;
                        let excess = if c.bound > 0.0 { c.max_d_r / c.bound - 1.0 } else { c.max_d_r };
                        dr.push(excess, 1e-12, || format!("n={n} r={r} N={occ}"));
                    }
                }
                let mut rng = instance_rng(ctx.seed ^ 0x0A7, n as u64);
                for occ in 0..=n {
                    for delta in [0.1, 0.25, 0.4, 0.5] {
                        let mut x = SymTypeOperator::random_hermitian(n, 2, &mut rng)?;
                        clear_low_block(&mut x, occ);
                        if x.trace_norm() == 0.0 {
                            continue;
                        }
                        let c = check_output_norm(occ, delta, &x)?;
                        let excess = if c.verdict == Verdict::Inapplicable { 0.0 } else { (c.lhs - c.rhs) / (1.0 + c.rhs) };
                        on.push(excess, 1e-10, || format!("n={n} N={occ} delta={delta}"));
                    }
                }
                Ok((dr, on))
            })
            .collect::<anyhow::Result<_>>()?;
        let (dr, on) = rows.into_iter().fold((Sweep::default(), Sweep::default()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));
        let mut tf = Sweep::default();
        let mut applicable = 0usize;
        for i in 0..plan.tail_instances {
            let mut rng = instance_rng(ctx.seed ^ 0x7A11, i as u64);
            let dim = rng.gen_range(2..=8);
            let (t, v, z) = random_tail_instance(dim, &mut rng);
            let c = check_tail_filtering(&t, &v, &z)?;
            if c.verdict != Verdict::Inapplicable {
                applicable += 1;
                tf.push((c.lhs - c.rhs) / (1.0 + c.rhs.abs()), 1e-10, || format!("triple {i} (dim {dim})"));
            }
        }
        let mut tf_rec = tf.record("tail-filtering-lemma", 1e-10);
        tf_rec.detail = format!("{}; {applicable}/{} triples applicable", tf_rec.detail, plan.tail_instances);
        Ok(vec![dr.record("d-r-bound", 1e-12), on.record("output-norm-proposition", 1e-10), tf_rec])
    });
    out.extend(stamp(rec?, ms));
    Ok(out)
}

/// Finite-n proof chain for a qubit state and a product family, `delta = 1/2`.
pub fn gqsl_chain(plan: &QuantumPlan, ctx: Ctx) -> CampaignResult {
    let rho = ctx.inputs.dense_state.clone().unwrap_or_else(default_qubit_state);
    let delta = ctx.params.delta.unwrap_or(0.5);
    // the blurred state lives on n + m sites
    let top = plan.chain_max_n + appended_sites(plan.chain_max_n, delta);
    let family = match &ctx.inputs.family {
        Some(f) => f.clone(),
        None => qubit_product_family(top)?,
    };
    let opts = ChainOptions { seed: ctx.seed, ..ChainOptions::default() };
    let mut out = Vec::new();
    let reachable = (1..=plan.chain_max_n).filter(|&n| n + appended_sites(n, delta) <= family.max_level());
    for n in reachable {
        let (rep, ms) = timed(|| check_gqsl_chain(&rho, None, &family, n, delta, Some(1.0), &opts));
        let rep = rep?;
        let recs: Vec<Record> = rep
            .records
            .into_iter()
            .map(|c| {
                let mut r = Record::from(c);
                r.name = format!("gqsl-chain n={n} {}", r.name);
                r
            })
            .collect();
        out.extend(stamp(recs, ms));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fock limit

/// Every occupation vector on `modes` modes with entries `<= max`.
fn occupations(modes: usize, max: usize) -> Vec<Vec<usize>> {
    let dim = fock_dim(modes, max).expect("small");
    (0..dim).map(|i| index_occupations(i, modes, max)).collect()
}

pub fn fock_convergence(ctx: Ctx) -> CampaignResult {
    let p = ctx.params;
    let d = p.d.unwrap_or(2);
    let modes = d - 1;
    let deltas = p.delta.map_or(vec![0.25, 0.4], |x| vec![x]);
    let n_grid = p.n_grid.clone().unwrap_or_else(|| vec![40, 80, 160]);
    let threshold = p.threshold.unwrap_or(0.05);
    let cutoff = p.cutoff.unwrap_or(3);
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = match (&p.h, &p.k) {
        (Some(h), Some(k)) => vec![(h.clone(), k.clone())],
        _ => {
            let occ = occupations(modes, cutoff.min(3));
            occ.iter().flat_map(|h| occ.iter().map(move |k| (h.clone(), k.clone()))).collect()
        }
    };
    let jobs: Vec<(f64, Vec<usize>, Vec<usize>)> =
        deltas.iter().flat_map(|&dl| pairs.iter().map(move |(h, k)| (dl, h.clone(), k.clone()))).collect();
    let mut out: Vec<Record> = jobs
        .par_iter()
        .map(|(delta, h, k)| -> anyhow::Result<Vec<Record>> {
            let (recs, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
                let rep = convergence_study(h, k, *delta, &n_grid, threshold)?;
                let mut recs = Vec::new();
                let mut prev: Option<f64> = None;
                let all_zero = rep.rows.iter().all(|r| r.error < 1e-13);
                let last_n = rep.rows.last().map(|r| r.n);
                for row in &rep.rows {
                    let decreasing = all_zero || prev.map_or(true, |e| row.error < e);
                    let below = Some(row.n) != last_n || row.error < threshold;
                    let verdict = if decreasing && below { Verdict::Pass } else { Verdict::Fail };
                    recs.push(
                        Record::new(format!("e_n h={h:?} k={k:?} delta={delta} n={}", row.n), verdict, row.error, threshold)
                            .detail(if Some(row.n) == last_n { "final row: decreasing and below threshold" } else { "decreasing" }),
                    );
                    prev = Some(row.error);
                }
                let c = h.iter().chain(k.iter()).copied().max().unwrap_or(0).max(1);
                let closed = limit_operator(h, k, *delta, c)?;
                let composed = limit_channel(*delta, &FockOperator::outer(c, h, k)?)?;
                let diff = closed.sub(&composed)?.operator().max_abs();
                recs.push(Record::le(format!("limit-two-paths h={h:?} k={k:?} delta={delta}"), diff, 0.0, 1e-12));
                Ok(recs)
            });
            Ok(stamp(recs?, ms))
        })
        .collect::<anyhow::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.extend(fock_basics(ctx.seed)?);
    Ok(out)
}

/// Loss/damping parameter identities, Kraus completeness, lift round trip.
fn fock_basics(seed: u64) -> CampaignResult {
    let mut ids = Sweep::default();
    for i in 1..=100 {
        let lp = LossParams::new(i as f64 * 0.005)?;
        let a = (lp.lambda.sqrt() * lp.mu - 1.0 / (1.0 + lp.delta)).abs();
        let b = (1.0 / lp.lambda - 1.0 - lp.delta * (1.0 + lp.delta)).abs();
        ids.push(a.max(b), 1e-12, || format!("delta={}", lp.delta));
    }
    let mut kraus = Sweep::default();
    let mut action = Sweep::default();
    let mut rng = instance_rng(seed ^ 0xF0C, 0);
    for cutoff in [4usize, 8, 12] {
        for lambda in [0.1, 0.5, 0.9] {
            let ks = pure_loss_kraus(lambda, cutoff)?;
            let sum = ks.iter().fold(nalgebra::DMatrix::zeros(cutoff + 1, cutoff + 1), |a, k| a + k.transpose() * k);
            kraus.push((sum - nalgebra::DMatrix::<f64>::identity(cutoff + 1, cutoff + 1)).amax(), 1e-12, || {
                format!("cutoff={cutoff} lambda={lambda}")
            });
            let x = FockOperator::new(1, cutoff, random::density(cutoff + 1, &mut rng))?;
            let mut via = blurlab::linalg::CMat::zeros(cutoff + 1, cutoff + 1);
            for k in &ks {
                let kc = k.map(|v| C64::new(v, 0.0));
                via += &kc * x.matrix() * kc.adjoint();
            }
            let direct = pure_loss(lambda, &x)?;
            let err = (via - direct.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let trace_err = (direct.trace().re - 1.0).abs();
            action.push(err.max(trace_err), 1e-12, || format!("cutoff={cutoff} lambda={lambda}"));
        }
    }
    let one = FockOperator::outer(3, &[1], &[1])?;
    let mu = 0.7;
    let damp = (damping(mu, &one)?.entry(&[1], &[1]).re - mu * mu).abs();
    let mut lift_rt = Sweep::default();
    for (n, d) in [(6usize, 2usize), (5, 3)] {
        let x = SymTypeOperator::random_hermitian(n, d, &mut rng)?;
        let back = unlift(n, &lift(&x, n)?)?;
        lift_rt.push(back.sub(&x)?.trace_norm(), 1e-12, || format!("n={n} d={d}"));
        let lifted = lifted_blur(n, 0.4, &lift(&x, n)?)?;
        let direct = lift(&blur_q(0.4, &x)?, n)?;
        lift_rt.push(lifted.sub(&direct)?.trace_norm(), 1e-12, || format!("lifted n={n} d={d}"));
    }
    Ok(vec![
        ids.record("loss-parameter-identities", 1e-12),
        kraus.record("pure-loss-kraus-completeness", 1e-12),
        action.record("pure-loss-fock-action", 1e-12),
        Record::le("damping-one-photon", damp, 0.0, 1e-15),
        lift_rt.record("lift-round-trip", 1e-12),
    ])
}

/// Default grid `10^0, 10^0.5, ..., 10^8`.
pub fn default_m_grid() -> Vec<f64> {
    (0..=16).map(|e| 10f64.powf(e as f64 / 2.0)).collect()
}

pub fn vacuum_support(ctx: Ctx) -> CampaignResult {
    let p = ctx.params;
    let big_delta = p.big_delta.unwrap_or(0.5);
    let nodes = p.nodes.unwrap_or(64);
    let cutoff = p.cutoff.unwrap_or(12);
    let grid = p.m_grid.clone().unwrap_or_else(default_m_grid);
    let tol = p.threshold.unwrap_or(0.05);
    let states: Vec<(String, FockOperator)> = match &ctx.inputs.fock_state {
        Some(s) => vec![("input state".into(), s.clone())],
        None => (0..p.instances.unwrap_or(20))
            .map(|i| {
                let mut rng = instance_rng(ctx.seed, i as u64);
                Ok((format!("random state {i}"), random_pure_fock(cutoff, &mut rng)?))
            })
            .collect::<anyhow::Result<_>>()?,
    };
    let mut out: Vec<Record> = states
        .par_iter()
        .map(|(label, rho)| -> anyhow::Result<Vec<Record>> {
            let (recs, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
                let rep = vacuum_support_experiment(rho, big_delta, nodes, &grid, tol)?;
                let last = *rep.support.values.last().unwrap_or(&f64::NAN);
                let first = rep.support.first_below(tol);
                let main = Record::new(format!("vacuum-support {label}"), rep.verdict, last, tol).detail(format!(
                    "nonincreasing {}, first M with f(M) < {tol}: {}, kernel overlap {:.3e}",
                    rep.support.nonincreasing,
                    first.map_or("none".to_string(), |m| format!("{m:e}")),
                    rep.support.kernel_overlap
                ));
                let quad = Record::new(
                    format!("quadrature-consistency {label}"),
                    if rep.quadrature_flagged { Verdict::Inconclusive } else { Verdict::Pass },
                    rep.richardson_gap,
                    1e-8,
                )
                .detail(format!("{nodes} vs {} midpoint nodes", 2 * nodes));
                Ok(vec![main, quad])
            });
            Ok(stamp(recs?, ms))
        })
        .collect::<anyhow::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let alpha = p.alpha.unwrap_or(2.0);
    let delta = p.delta.unwrap_or(0.3);
    let (cx, ms) = timed(|| coherent_counterexample(alpha, delta, cutoff.max(30), &grid, 0.02));
    let cx = cx?;
    let mut r = Record::new(
        format!("coherent-counterexample alpha={alpha} delta={delta}"),
        cx.verdict,
        cx.min_value,
        cx.analytic_floor - cx.margin,
    )
    .detail(format!(
        "min f(M) must stay >= 1 - exp(-lambda alpha^2) - {}; lambda {:.6}, truncation {:.2e}{}",
        cx.margin,
        cx.lambda,
        cx.truncation,
        cx.suggested_cutoff.map_or(String::new(), |c| format!(", retry with cutoff {c}"))
    ));
    r.slack = cx.min_value - (cx.analytic_floor - cx.margin);
    r.runtime_ms = ms;
    out.push(r);
    Ok(out)
}

// ---------------------------------------------------------------------------
// free sets

pub fn axioms(ctx: Ctx) -> CampaignResult {
    let mut out = Vec::new();
    let good: Vec<(String, FreeFamily)> = match &ctx.inputs.family {
        Some(f) => vec![("input family".into(), f.clone())],
        None => vec![
            ("qubit product family".into(), qubit_product_family(3)?),
            (
                "classical trit product family".into(),
                build_product_family(
                    vec![DenseOperator::diagonal(&[0.6, 0.3, 0.1]), DenseOperator::diagonal(&[0.1, 0.2, 0.7])],
                    2,
                )?,
            ),
        ],
    };
    for (label, fam) in &good {
        let levels: Vec<usize> = fam.levels().collect();
        let (rep, ms) = timed(|| check_axioms(fam, &levels));
        let rep = rep?;
        let each = ms / 5.0;
        for e in &rep.entries {
            let ok = e.verdict == Verdict::Pass && e.residual < 1e-8;
            let mut r = Record::le(format!("axiom A{} ({}) {label}", e.axiom, e.name), e.residual, 1e-8, 0.0)
                .with_verdict(if ok { Verdict::Pass } else { Verdict::Fail })
                .detail(e.detail.clone());
            r.runtime_ms = each;
            out.push(r);
        }
    }
    for axiom in 2..=5u8 {
        let (rec, ms) = timed(|| -> anyhow::Result<Record> {
            let fam = broken_family(axiom)?;
            let levels: Vec<usize> = fam.levels().collect();
            let rep = check_axioms(&fam, &levels)?;
            let e = rep.entry(axiom);
            let caught = e.verdict == Verdict::Fail && e.residual > 0.1;
            let mut r = Record::new(
                format!("broken family caught by A{axiom}"),
                if caught { Verdict::Pass } else { Verdict::Fail },
                0.1,
                e.residual,
            )
            .detail(e.detail.clone());
            r.slack = e.residual - 0.1;
            Ok(r)
        });
        let mut r = rec?;
        r.runtime_ms = ms;
        out.push(r);
    }
    Ok(out)
}

/// `(1/n) D(rho^{⊗n} || F_n)`, `(1/n) Dtilde^eps` and the universal and
/// subadditivity bounds on `D_max`, for `n = 1..=N`.
pub fn stein_estimate(ctx: Ctx) -> CampaignResult {
    let max_n = ctx.params.n.unwrap_or(3);
    let eps = ctx.params.eps.unwrap_or(0.1);
    let rho = ctx.inputs.dense_state.clone().unwrap_or_else(default_qubit_state);
    let family = match &ctx.inputs.family {
        Some(f) => f.clone(),
        None => qubit_product_family(max_n)?,
    };
    let opts = HullOptions::default();
    let c = family.c();
    let mut out = Vec::new();
    let mut dmax1 = f64::NAN;
    let mut rel1 = f64::NAN;
    for n in 1..=max_n.min(family.max_level()) {
        let (recs, ms) = timed(|| -> anyhow::Result<Vec<Record>> {
            let rho_n = tensor_power(&rho, n)?;
            let gens = family.level(n)?;
            let nf = n as f64;
            let rel = rel_ent_to_hull(&rho_n, gens, &opts)?;
            let dmx = d_max_to_hull(&rho_n, gens, &opts)?;
            let dtl = dtilde_to_hull(&rho_n, gens, eps, &opts)?;
            let conv = |r: &blurlab::divergences::DivergenceResult| {
                if r.certificate.gap() <= 1e-6 * (1.0 + r.value.abs()) {
                    Verdict::Pass
                } else {
                    Verdict::Inconclusive
                }
            };
            if n == 1 {
                dmax1 = dmx.certificate.upper;
                rel1 = rel.certificate.upper;
            }
            let mut recs = vec![
                Record::new(format!("relative-entropy-rate n={n}"), conv(&rel), rel.value / nf, rel.value / nf)
                    .certificate(format!("[{:.9e}, {:.9e}]", rel.certificate.lower / nf, rel.certificate.upper / nf)),
                Record::new(format!("dtilde-rate n={n} eps={eps}"), conv(&dtl), dtl.value / nf, dtl.value / nf)
                    .certificate(format!("[{:.9e}, {:.9e}]", dtl.certificate.lower / nf, dtl.certificate.upper / nf)),
                Record::le(format!("dmax-universal-bound n={n}"), dmx.certificate.lower, nf * (1.0 / c).log2(), 1e-8),
                Record::le(format!("dmax-subadditive n={n}"), dmx.certificate.lower, nf * dmax1, 1e-8),
                Record::le(format!("relative-entropy-subadditive n={n}"), rel.certificate.lower, nf * rel1, 1e-8),
            ];
            recs[0].slack = 0.0;
            recs[1].slack = 0.0;
            Ok(recs)
        });
        out.extend(stamp(recs?, ms));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// quick pass

/// Small versions of every campaign, with record names prefixed by the
/// campaign they come from.
pub fn check_lemmas(ctx: Ctx) -> CampaignResult {
    let mut out = Vec::new();
    let mut add = |prefix: &str, recs: Vec<Record>| {
        out.extend(recs.into_iter().map(|mut r| {
            r.name = format!("{prefix}: {}", r.name);
            r
        }))
    };
    let small = |f: fn(&mut Params)| {
        let mut p = ctx.params.clone();
        f(&mut p);
        p
    };
    let p = small(|p| p.n = Some(p.n.unwrap_or(12).min(16)));
    add("hypergeometric", hypergeometric(Ctx { params: &p, ..ctx })?);
    let p = small(|p| p.instances = Some(p.instances.unwrap_or(20)));
    add("divergences", divergences(Ctx { params: &p, ..ctx })?);
    let p = small(|p| {
        p.instances = Some(p.instances.unwrap_or(10));
        p.n = Some(12);
    });
    add("classical-lemma", classical_lemma(Ctx { params: &p, ..ctx })?);
    let p = small(|p| {
        p.instances = Some(5);
        p.n = Some(6);
    });
    add("classical-stein", classical_stein(Ctx { params: &p, ..ctx })?);
    let plan = QuantumPlan {
        kraus_max_n: 4,
        kraus_dims: vec![2, 3],
        kraus_instances: 3,
        oracle_max_n: 3,
        oracle_instances: 2,
        classical_oracle: (4, 2),
        norm_max_n: 8,
        tail_instances: 10,
        chain_max_n: 2,
    };
    add("quantum-blurring", quantum_blurring_with(&plan, ctx)?);
    let p = Params { h: Some(vec![1]), k: Some(vec![1]), delta: Some(0.25), n_grid: Some(vec![20, 40]), ..Params::default() };
    add("fock-convergence", fock_convergence(Ctx { params: &p, ..ctx })?);
    let p = Params { instances: Some(2), nodes: Some(16), ..Params::default() };
    add("vacuum-support", vacuum_support(Ctx { params: &p, ..ctx })?);
    let p = Params::default();
    add("axioms", axioms(Ctx { params: &p, inputs: &LoadedInputs::default(), ..ctx })?);
    let p = Params { n: Some(2), ..Params::default() };
    add("stein-estimate", stein_estimate(Ctx { params: &p, inputs: &LoadedInputs::default(), ..ctx })?);
    Ok(out)
}
