//! Relative entropies between states and between a state and the convex
//! hull of a finite generator set. Logarithms are base 2.
//!
//! Classical smoothing uses the normalised trace ball: `p'` ranges over
//! probability distributions with `(1/2)||p - p'||_1 <= eps`. For `mu >= 1`
//! there is always room under the cap `mu q` to re-deposit the mass cut
//! from `p`, so `D_max^eps(p||q) = log max(1, mu*)` with `mu*` the smallest
//! `mu` such that `sum (p - mu q)_+ <= eps`.

mod barrier;
mod hull;

pub use hull::{d_max_to_hull, dtilde_to_hull, rel_ent_to_hull, HullOptions};

use serde::{Deserialize, Serialize};

use crate::linalg::{eigh, DenseOperator};
use crate::report::Bracket;
use crate::{precondition, tolerances, Error, Result};

/// Optimiser output attached to a divergence value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Optimal test operator `0 <= Q <= 1`.
    Test { operator: DenseOperator },
    /// Optimal classical test.
    ClassicalTest { weights: Vec<f64> },
    /// Smoothed distribution `p'` attaining the value.
    Smoothed { distribution: Vec<f64> },
    /// Remainder `Delta` in `rho <= 2^lambda sigma + Delta`.
    Remainder { operator: DenseOperator },
    /// Weights of the best mixture of generators.
    Mixture { weights: Vec<f64> },
}

/// How far the reported value is from the true optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Certified lower bound on the divergence.
    #[serde(with = "crate::report::extended_f64")]
    pub lower: f64,
    /// Certified upper bound on the divergence.
    #[serde(with = "crate::report::extended_f64")]
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Certificate {
    pub fn exact(v: f64) -> Self {
        Self { lower: v, upper: v, iterations: 0, converged: true, note: None }
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A divergence value (possibly `+inf`) with witness and certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    #[serde(with = "crate::report::extended_f64")]
    pub value: f64,
    pub infinite: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub certificate: Certificate,
}

impl DivergenceResult {
    pub fn exact(value: f64) -> Self {
        Self { value, infinite: value == f64::INFINITY, witness: None, certificate: Certificate::exact(value) }
    }

    pub fn infinite(note: impl Into<String>) -> Self {
        let mut c = Certificate::exact(f64::INFINITY);
        c.note = Some(note.into());
        Self { value: f64::INFINITY, infinite: true, witness: None, certificate: c }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn bracket(&self) -> Bracket {
        Bracket { lo: self.certificate.lower, hi: self.certificate.upper }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return precondition(format!("eps must be in [0, 1), got {eps}"));
    }
    Ok(())
}

/// Checks that `p` is a probability vector.
pub fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return precondition("empty distribution");
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= -1e-15)) {
        return precondition(format!("distribution has invalid entry {x}"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tolerances().normalization {
        return Err(Error::NotNormalized(s));
    }
    Ok(())
}

fn same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", p.len(), q.len())));
    }
    Ok(())
}

fn validate_pair(rho: &DenseOperator, sigma: &DenseOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    rho.validate_state()?;
    sigma.validate_state()
}

/// Classical relative entropy `sum p log(p/q)`.
pub fn relative_entropy_classical(p: &[f64], q: &[f64]) -> Result<DivergenceResult> {
    validate_distribution(p)?;
    validate_distribution(q)?;
    same_len(p, q)?;
    let mut v = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Ok(DivergenceResult::infinite("p not absolutely continuous w.r.t. q"));
        }
        v += a * (a / b).log2();
    }
    Ok(DivergenceResult::exact(v))
}

/// Classical `D_max(p||q) = log max_x p(x)/q(x)`.
pub fn d_max_classical(p: &[f64], q: &[f64]) -> Result<DivergenceResult> {
    validate_distribution(p)?;
    validate_distribution(q)?;
    same_len(p, q)?;
    let mut r = 0.0f64;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Ok(DivergenceResult::infinite("p not absolutely continuous w.r.t. q"));
        }
        r = r.max(a / b);
    }
    Ok(DivergenceResult::exact(r.log2()))
}

/// Smallest `mu >= 0` with `sum_x (p(x) - mu q(x))_+ <= eps`; `None` if no
/// finite `mu` works.
pub fn threshold_mu(p: &[f64], q: &[f64], eps: f64) -> Option<f64> {
    let at_infinity: f64 = p.iter().zip(q).filter(|(_, &b)| b <= 0.0).map(|(&a, _)| a.max(0.0)).sum();
    if at_infinity > eps {
        return None;
    }
    let mut ratios: Vec<(f64, f64, f64)> =
        p.iter().zip(q).filter(|(&a, &b)| b > 0.0 && a > 0.0).map(|(&a, &b)| (a / b, a, b)).collect();
    ratios.sort_by(|x, y| y.0.total_cmp(&x.0));
    // On [r_{j+1}, r_j] the map is A_j - mu B_j with the first j terms active.
    let (mut a, mut b) = (at_infinity, 0.0);
    for j in 0..ratios.len() {
        a += ratios[j].1;
        b += ratios[j].2;
        let next = ratios.get(j + 1).map_or(0.0, |r| r.0);
        if a - next * b > eps {
            return Some(((a - eps) / b).max(next));
        }
    }
    Some(0.0)
}

/// Datta–Leditzky smoothed `Dtilde_max^eps(p||q) = log min{mu : sum (p - mu q)_+ <= eps}`.
pub fn dtilde_max_classical(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceResult> {
    validate_distribution(p)?;
    validate_distribution(q)?;
    same_len(p, q)?;
    check_eps(eps)?;
    match threshold_mu(p, q, eps) {
        None => Ok(DivergenceResult::infinite("mass outside supp q exceeds eps")),
        Some(mu) => Ok(DivergenceResult::exact(mu.log2())),
    }
}

/// Smoothed `D_max^eps(p||q)` over the normalised trace ball, with the
/// optimal `p'` as witness.
pub fn d_max_smoothed_classical(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceResult> {
    validate_distribution(p)?;
    validate_distribution(q)?;
    same_len(p, q)?;
    check_eps(eps)?;
    let Some(mu) = threshold_mu(p, q, eps) else {
        return Ok(DivergenceResult::infinite("mass outside supp q exceeds eps"));
    };
    let mu = mu.max(1.0);
    Ok(DivergenceResult::exact(mu.log2()).with_witness(Witness::Smoothed { distribution: smoothed_witness(p, q, mu) }))
}

/// `min(p, mu q)` plus the cut mass spread over the remaining room under `mu q`.
fn smoothed_witness(p: &[f64], q: &[f64], mu: f64) -> Vec<f64> {
    let capped: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| a.min(mu * b)).collect();
    let cut: f64 = 1.0 - capped.iter().sum::<f64>();
    let room: Vec<f64> = capped.iter().zip(q).map(|(&c, &b)| (mu * b - c).max(0.0)).collect();
    let total: f64 = room.iter().sum();
    if cut <= 0.0 || total <= 0.0 {
        return capped;
    }
    capped.iter().zip(&room).map(|(&c, &r)| c + cut * r / total).collect()
}

/// Classical hypothesis-testing divergence by likelihood-ratio thresholding,
/// with the optimal (possibly randomised) test as witness.
pub fn d_h_classical(p: &[f64], q: &[f64], eps: f64) -> Result<DivergenceResult> {
    validate_distribution(p)?;
    validate_distribution(q)?;
    same_len(p, q)?;
    check_eps(eps)?;
    let target = 1.0 - eps;
    let mut order: Vec<usize> = (0..p.len()).collect();
    let ratio = |i: usize| if q[i] <= 0.0 { f64::INFINITY } else { p[i] / q[i] };
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(p[b].total_cmp(&p[a])));
    let mut test = vec![0.0; p.len()];
    let mut got = 0.0;
    for &i in &order {
        if got >= target {
            break;
        }
        if p[i] <= 0.0 {
            continue;
        }
        let need = target - got;
        if p[i] <= need {
            test[i] = 1.0;
            got += p[i];
        } else {
            test[i] = need / p[i];
            got = target;
        }
    }
    let beta: f64 = test.iter().zip(q).map(|(t, b)| t * b).sum();
    let v = if beta <= 0.0 { f64::INFINITY } else { -beta.log2() };
    let mut r = DivergenceResult::exact(v);
    r.infinite = v.is_infinite();
    Ok(r.with_witness(Witness::ClassicalTest { weights: test }))
}

/// Umegaki relative entropy `Tr rho (log rho - log sigma)`; `+inf` when
/// `rho` has mass above `1e-10` on an eigenvector of `sigma` with eigenvalue
/// below the kernel tolerance.
pub fn umegaki(rho: &DenseOperator, sigma: &DenseOperator) -> Result<DivergenceResult> {
    validate_pair(rho, sigma)?;
    let ker = tolerances().kernel;
    let sr = eigh(rho)?;
    let ss = eigh(sigma)?;
    let mut v: f64 = sr.values.iter().filter(|&&l| l > 0.0).map(|&l| l * l.log2()).sum();
    for (j, &s) in ss.values.iter().enumerate() {
        let col = ss.vectors.column(j);
        let w = (col.adjoint() * rho.matrix() * col)[(0, 0)].re;
        if s <= ker {
            if w > 1e-10 {
                return Ok(DivergenceResult::infinite("supp rho not contained in supp sigma"));
            }
            continue;
        }
        v -= w * s.log2();
    }
    Ok(DivergenceResult::exact(v))
}

/// Support projector data of `sigma`: eigenvectors above the kernel tolerance.
fn support_split(sigma: &DenseOperator) -> Result<(crate::linalg::HermitianSpectrum, usize)> {
    let ss = eigh(sigma)?;
    let ker = tolerances().kernel;
    let rank = ss.values.iter().filter(|&&l| l > ker).count();
    Ok((ss, rank))
}

/// Mass of `rho` outside the support of `sigma`.
pub(crate) fn mass_outside_support(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    let (ss, rank) = support_split(sigma)?;
    let v = ss.vectors.columns(rank, ss.values.len() - rank);
    Ok((v.adjoint() * rho.matrix() * v).trace().re.max(0.0))
}

/// `D_max(rho||sigma) = log lambda_max(sigma^{-1/2} rho sigma^{-1/2})` on the
/// support of `sigma`; `+inf` if `rho` leaks outside it.
pub fn d_max(rho: &DenseOperator, sigma: &DenseOperator) -> Result<DivergenceResult> {
    validate_pair(rho, sigma)?;
    let (ss, rank) = support_split(sigma)?;
    let dim = rho.dim();
    let outside = ss.vectors.columns(rank, dim - rank);
    if (outside.adjoint() * rho.matrix() * outside).trace().re > 1e-10 {
        return Ok(DivergenceResult::infinite("supp rho not contained in supp sigma"));
    }
    let v = ss.vectors.columns(0, rank);
    let mut r = v.adjoint() * rho.matrix() * v;
    for i in 0..rank {
        for j in 0..rank {
            r[(i, j)] /= (ss.values[i] * ss.values[j]).sqrt();
        }
    }
    let top = crate::linalg::eigh_unchecked(&r).max();
    Ok(DivergenceResult::exact(top.log2()))
}

/// Hypothesis-testing divergence `-log min{Tr Q sigma : 0 <= Q <= 1, Tr Q rho >= 1 - eps}`.
///
/// Neyman–Pearson: the optimal test is built from positive projectors of
/// `rho - t sigma` at the critical threshold, with a fractional weight on
/// the boundary. The threshold is located by bisection; the reported value
/// is attained by the returned test and the certificate's upper bound comes
/// from the weak-duality bound `beta >= (1 - eps - Tr(rho - t sigma)_+)/t`.
pub fn d_h(rho: &DenseOperator, sigma: &DenseOperator, eps: f64) -> Result<DivergenceResult> {
    validate_pair(rho, sigma)?;
    check_eps(eps)?;
    let target = 1.0 - eps;
    let (ss, rank) = support_split(sigma)?;
    let dim = rho.dim();
    let ker_vecs = ss.vectors.columns(rank, dim - rank).into_owned();
    let ker_mass = (ker_vecs.adjoint() * rho.matrix() * &ker_vecs).trace().re.max(0.0);
    if ker_mass >= target {
        let p = DenseOperator::from_mat(&ker_vecs * ker_vecs.adjoint());
        let q = p.scale(target / ker_mass);
        return Ok(DivergenceResult::infinite("test supported on ker sigma meets the constraint")
            .with_witness(Witness::Test { operator: q }));
    }
    // Positive projector of rho - t sigma and its rho-weight.
    let probe = |t: f64| -> Result<(DenseOperator, f64, f64)> {
        let x = rho.sub(&sigma.scale(t))?;
        let sp = eigh(&x)?;
        let thr = if t == 0.0 { tolerances().kernel } else { 0.0 };
        let proj = sp.projector(|l| l > thr);
        let pos: f64 = sp.values.iter().filter(|&&l| l > 0.0).sum();
        let w = proj.matmul(rho)?.trace().re;
        Ok((proj, w, pos))
    };
    let mut dual_best = 0.0f64;
    let mut dual = |t: f64, pos: f64| {
        if t > 0.0 {
            dual_best = dual_best.max((target - pos) / t);
        }
    };
    let (mut p_lo, mut f_lo, _) = probe(0.0)?;
    let mut t_lo = 0.0;
    let mut t_hi = 1.0;
    let (mut p_hi, mut f_hi, pos) = probe(t_hi)?;
    dual(t_hi, pos);
    let mut iters = 0;
    while f_hi >= target {
        t_lo = t_hi;
        p_lo = p_hi;
        f_lo = f_hi;
        t_hi *= 2.0;
        let r = probe(t_hi)?;
        dual(t_hi, r.2);
        p_hi = r.0;
        f_hi = r.1;
        iters += 1;
        if t_hi > 1e300 {
            return Err(Error::Numerical("threshold search diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = if t_lo > 0.0 { (t_lo * t_hi).sqrt() } else { 0.5 * t_hi };
        if mid <= t_lo || mid >= t_hi || (t_lo > 0.0 && t_hi / t_lo - 1.0 < 1e-15) {
            break;
        }
        let (pm, fm, pos) = probe(mid)?;
        dual(mid, pos);
        iters += 1;
        if fm >= target {
            t_lo = mid;
            p_lo = pm;
            f_lo = fm;
        } else {
            t_hi = mid;
            p_hi = pm;
            f_hi = fm;
        }
    }
    let theta = if f_lo > f_hi { ((target - f_hi) / (f_lo - f_hi)).clamp(0.0, 1.0) } else { 1.0 };
    let q = p_lo.scale(theta).add(&p_hi.scale(1.0 - theta))?;
    let beta = q.matmul(sigma)?.trace().re.max(0.0);
    let value = if beta > 0.0 { -beta.log2() } else { f64::INFINITY };
    let upper = if dual_best > 0.0 { -dual_best.log2() } else { f64::INFINITY };
    Ok(DivergenceResult {
        value,
        infinite: value.is_infinite(),
        witness: Some(Witness::Test { operator: q }),
        certificate: Certificate { lower: value, upper: upper.max(value), iterations: iters, converged: true, note: None },
    })
}

/// Datta–Leditzky `Dtilde_max^eps(rho||sigma) = min{lambda : Tr(rho - 2^lambda sigma)_+ <= eps}`
/// by bisection on `lambda`. The certificate records the final bracket and
/// whether the sampled map `lambda -> Tr(...)_+` was nonincreasing.
pub fn dtilde_max(rho: &DenseOperator, sigma: &DenseOperator, eps: f64) -> Result<DivergenceResult> {
    validate_pair(rho, sigma)?;
    check_eps(eps)?;
    if eps == 0.0 {
        return d_max(rho, sigma);
    }
    let outside = mass_outside_support(rho, sigma)?;
    if outside > eps + 1e-12 {
        return Ok(DivergenceResult::infinite("mass outside supp sigma exceeds eps"));
    }
    let h = |lam: f64| -> Result<f64> { crate::linalg::trace_positive_part(&rho.sub(&sigma.scale(lam.exp2()))?) };
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut lo = (1.0 - eps).log2();
    let h_lo = h(lo)?;
    trace.push((lo, h_lo));
    if h_lo <= eps {
        return Ok(DivergenceResult::exact(lo));
    }
    let mut step = 1.0;
    let mut hi = lo + step;
    loop {
        let v = h(hi)?;
        trace.push((hi, v));
        if v <= eps {
            break;
        }
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        if hi > 2000.0 {
            return Ok(DivergenceResult::infinite("no finite threshold below 2^2000"));
        }
    }
    let mut iters = 0;
    while hi - lo > 1e-12 * hi.abs().max(1.0) && iters < 200 {
        let mid = 0.5 * (lo + hi);
        let v = h(mid)?;
        trace.push((mid, v));
        if v <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    trace.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = trace.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    let remainder = crate::linalg::eigh(&rho.sub(&sigma.scale(hi.exp2()))?)?.map(|l| l.max(0.0));
    Ok(DivergenceResult {
        value: hi,
        infinite: false,
        witness: Some(Witness::Remainder { operator: remainder }),
        certificate: Certificate {
            lower: lo,
            upper: hi,
            iterations: iters,
            converged: monotone,
            note: (!monotone).then(|| "sampled positive-part trace was not monotone".to_string()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smoothed_example() {
        let r = d_max_smoothed_classical(&[1.0, 0.0], &[0.5, 0.5], 0.25).unwrap();
        assert!((r.value - 1.5f64.log2()).abs() < 1e-14);
        let Some(Witness::Smoothed { distribution }) = r.witness else { panic!() };
        assert!((distribution[0] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn dtilde_self_is_log_one_minus_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::density(3, &mut rng);
        let r = dtilde_max(&rho, &rho, 0.3).unwrap();
        assert!((r.value - 0.7f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn umegaki_support_failure_is_infinite() {
        let rho = DenseOperator::diagonal(&[0.5, 0.5]);
        let sigma = DenseOperator::diagonal(&[1.0, 0.0]);
        assert!(umegaki(&rho, &sigma).unwrap().infinite);
        assert!(d_max(&rho, &sigma).unwrap().infinite);
        assert!(umegaki(&sigma, &rho).unwrap().value.is_finite());
    }

    #[test]
    fn d_h_classical_matches_quantum_on_diagonals() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.3, 0.5];
        for eps in [0.0, 0.1, 0.35, 0.8] {
            let c = d_h_classical(&p, &q, eps).unwrap();
            let qd = d_h(&DenseOperator::diagonal(&p), &DenseOperator::diagonal(&q), eps).unwrap();
            assert!((c.value - qd.value).abs() < 1e-9, "eps {eps}: {} vs {}", c.value, qd.value);
        }
    }

    #[test]
    fn d_h_classical_matches_exhaustive_tests() {
        // Deterministic tests plus one fractional coordinate.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        for _ in 0..50 {
            let k = rng.gen_range(2..6);
            let mut p: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let mut q: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);
            let eps = rng.gen_range(0.0..0.9);
            let target = 1.0 - eps;
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << k) {
                let pin: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| p[i]).sum();
                let qin: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| q[i]).sum();
                if pin >= target {
                    best = best.min(qin);
                }
                for x in (0..k).filter(|i| mask >> i & 1 == 0) {
                    let c = (target - pin) / p[x];
                    if (0.0..=1.0).contains(&c) {
                        best = best.min(qin + c * q[x]);
                    }
                }
            }
            let r = d_h_classical(&p, &q, eps).unwrap();
            assert!((r.value + best.log2()).abs() < 1e-10);
        }
    }

    #[test]
    fn d_h_quantum_witness_and_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let rho = random::density(4, &mut rng);
            let sigma = random::density(4, &mut rng);
            let r = d_h(&rho, &sigma, 0.2).unwrap();
            let Some(Witness::Test { operator }) = &r.witness else { panic!() };
            let tr_rho = operator.matmul(&rho).unwrap().trace().re;
            assert!(tr_rho >= 0.8 - 1e-9);
            let sp = eigh(operator).unwrap();
            assert!(sp.min() > -1e-9 && sp.max() < 1.0 + 1e-9);
            assert!(r.certificate.gap() < 1e-8, "gap {}", r.certificate.gap());
        }
    }

    #[test]
    fn threshold_mu_rejects_mass_on_zero_q() {
        assert!(threshold_mu(&[0.5, 0.5], &[1.0, 0.0], 0.4).is_none());
        assert_eq!(threshold_mu(&[0.5, 0.5], &[1.0, 0.0], 0.5), Some(0.5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn d_le_dmax_and_dtilde_bracket(seed in any::<u64>(), dim in 2usize..5, eps in 0.01f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random::density(dim, &mut rng);
            let sigma = random::density(dim, &mut rng);
            let d = umegaki(&rho, &sigma).unwrap().value;
            let dm = d_max(&rho, &sigma).unwrap().value;
            prop_assert!(d <= dm + 1e-9);
            let dt = dtilde_max(&rho, &sigma, eps).unwrap();
            prop_assert!(dt.value <= dm + 1e-9);
            prop_assert!(dt.certificate.converged);
        }

        #[test]
        fn smoothed_witness_is_feasible(seed in any::<u64>(), k in 2usize..6, eps in 0.0f64..0.95) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let mut q: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);
            let r = d_max_smoothed_classical(&p, &q, eps).unwrap();
            let Some(Witness::Smoothed { distribution }) = r.witness else { panic!() };
            let dist: f64 = 0.5 * p.iter().zip(&distribution).map(|(a, b)| (a - b).abs()).sum::<f64>();
            prop_assert!(dist <= eps + 1e-12);
            prop_assert!((distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let mu = r.value.exp2();
            for (a, b) in distribution.iter().zip(&q) {
                prop_assert!(*a <= mu * b * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
