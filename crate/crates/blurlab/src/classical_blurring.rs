//! Classical blurring on type space: append `m` copies of every symbol,
//! shuffle, keep `n` symbols. Permutation-symmetric distributions are
//! represented by the total mass of each type class.
//!
//! Smoothing a symmetric distribution may be restricted to symmetric `p'`:
//! averaging any feasible `p'` over permutations keeps it in the trace ball
//! and cannot raise `D_max` against a symmetric second argument. On type
//! space the trace distance and the max-ratio are the ones of the type-mass
//! vectors, so all smoothed quantities below are computed there.

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::{d_max_smoothed_classical, dtilde_to_hull, validate_distribution, HullOptions};
use crate::free_sets::{FamilyRule, FreeFamily};
use crate::hypergeometric::{bosonic_entropy, exact, multivariate_pmf};
use crate::linalg::DenseOperator;
use crate::report::{certify_le, Bracket, Verdict};
use crate::types::{ln_factorial, TypeIndex, TypeVector};
use crate::{precondition, robust_ceil, Error, Result};

/// Permutation-symmetric distribution on `X^n`, stored as type-class masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricDistribution {
    n: usize,
    alphabet: usize,
    /// Mass of each type class, in [`TypeIndex`] order.
    weights: Vec<f64>,
}

impl SymmetricDistribution {
    pub fn new(n: usize, alphabet: usize, weights: Vec<f64>) -> Result<Self> {
        let index = TypeIndex::new(n, alphabet)?;
        if weights.len() != index.len() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} types", weights.len(), index.len())));
        }
        validate_distribution(&weights)?;
        Ok(Self { n, alphabet, weights })
    }

    /// Type-space view of `p^{⊗n}`.
    pub fn iid(p: &[f64], n: usize) -> Result<Self> {
        validate_distribution(p)?;
        let index = TypeIndex::new(n, p.len())?;
        let mut w: Vec<f64> = index.types().iter().map(|t| iid_type_mass(p, t)).collect();
        normalise(&mut w);
        Ok(Self { n, alphabet: p.len(), weights: w })
    }

    /// Random symmetric distribution: a Dirichlet(1) mixture of a few i.i.d.
    /// views and a uniformly random type-mass vector.
    pub fn random<R: Rng + ?Sized>(n: usize, alphabet: usize, rng: &mut R) -> Result<Self> {
        let index = TypeIndex::new(n, alphabet)?;
        let mut w = vec![0.0; index.len()];
        let parts = 3;
        let coeffs = dirichlet(parts + 1, rng);
        for c in &coeffs[..parts] {
            let p = dirichlet(alphabet, rng);
            for (wi, t) in w.iter_mut().zip(index.types()) {
                *wi += c * iid_type_mass(&p, t);
            }
        }
        let flat = dirichlet(index.len(), rng);
        for (wi, f) in w.iter_mut().zip(flat) {
            *wi += coeffs[parts] * f;
        }
        normalise(&mut w);
        Ok(Self { n, alphabet, weights: w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability of a single sequence of type `t`.
    pub fn sequence_probability(&self, t: &TypeVector) -> Result<f64> {
        let index = TypeIndex::new(self.n, self.alphabet)?;
        let i = index
            .position(t.counts())
            .ok_or_else(|| Error::DimensionMismatch("type does not match the distribution".into()))?;
        let ln_class = ln_factorial(self.n) - t.counts().iter().map(|&c| ln_factorial(c)).sum::<f64>();
        Ok(self.weights[i] * (-ln_class).exp())
    }

    /// Mass on the types within infinity distance `delta` of `s`.
    pub fn ball_mass(&self, s: &[f64], delta: f64) -> Result<f64> {
        Ok(ball_mask(self.n, s, delta)?.iter().zip(&self.weights).filter(|(m, _)| **m).map(|(_, w)| w).sum())
    }
}

fn normalise(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
}

fn dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    normalise(&mut v);
    v
}

/// `|T_{n,t}| prod_x p(x)^{n t(x)}`.
fn iid_type_mass(p: &[f64], t: &TypeVector) -> f64 {
    let mut ln = ln_factorial(t.n());
    for (&c, &px) in t.counts().iter().zip(p) {
        if c > 0 {
            if px <= 0.0 {
                return 0.0;
            }
            ln += c as f64 * px.ln() - ln_factorial(c);
        }
    }
    ln.exp()
}

/// Membership of each type (in index order) in the closed infinity ball.
fn ball_mask(n: usize, s: &[f64], delta: f64) -> Result<Vec<bool>> {
    let index = TypeIndex::new(n, s.len())?;
    let ball = crate::types::type_ball(n, s, delta)?;
    let mut mask = vec![false; index.len()];
    for t in &ball {
        mask[index.position(t.counts()).expect("ball types are enumerated")] = true;
    }
    Ok(mask)
}

/// Column-stochastic transition matrix of the blurring map on type space.
#[derive(Clone, Debug)]
pub struct BlurKernel {
    n: usize,
    m: usize,
    alphabet: usize,
    /// `matrix[(t, u)]`: probability of output type `t` from input type `u`.
    matrix: DMatrix<f64>,
}

impl BlurKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `K[t|u]`.
    pub fn entry(&self, out: usize, input: usize) -> f64 {
        self.matrix[(out, input)]
    }
}

/// Urn composition `n u + m 1` for input type `u`.
fn urn_for(u: &TypeVector, m: usize) -> TypeVector {
    TypeVector::new(u.counts().iter().map(|&c| c + m).collect())
}

/// `K[t|u] = H_{n + m|X|, v_u; n}(t)`.
pub fn blur_kernel(n: usize, m: usize, alphabet: usize) -> Result<BlurKernel> {
    let index = TypeIndex::new(n, alphabet)?;
    let len = index.len();
    if len.saturating_mul(len) > 25_000_000 {
        return Err(Error::SizeGuard(format!("kernel with {len}^2 entries")));
    }
    let cols: Vec<Vec<f64>> = index
        .types()
        .par_iter()
        .map(|u| {
            let urn = urn_for(u, m);
            index.types().iter().map(|t| multivariate_pmf(&urn, t)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(len, len, |t, u| cols[u][t]);
    Ok(BlurKernel { n, m, alphabet, matrix })
}

/// Exact rational kernel, `kernel[u][t] = K[t|u]`.
pub fn exact_blur_kernel(n: usize, m: usize, alphabet: usize) -> Result<Vec<Vec<BigRational>>> {
    let index = TypeIndex::new(n, alphabet)?;
    index
        .types()
        .iter()
        .map(|u| {
            let urn = urn_for(u, m);
            index.types().iter().map(|t| exact::multivariate_pmf(&urn, t)).collect()
        })
        .collect()
}

pub fn apply_blur(kernel: &BlurKernel, p: &SymmetricDistribution) -> Result<SymmetricDistribution> {
    if p.n != kernel.n || p.alphabet != kernel.alphabet {
        return Err(Error::DimensionMismatch(format!(
            "kernel on (n={}, |X|={}) applied to (n={}, |X|={})",
            kernel.n, kernel.alphabet, p.n, p.alphabet
        )));
    }
    let v = &kernel.matrix * nalgebra::DVector::from_column_slice(&p.weights);
    let mut w: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    normalise(&mut w);
    Ok(SymmetricDistribution { n: p.n, alphabet: p.alphabet, weights: w })
}

/// Mass of `p^{⊗n}` on the `delta`-ball of types around `p`.
pub fn typicality_mass(p: &[f64], n: usize, delta: f64) -> Result<f64> {
    SymmetricDistribution::iid(p, n)?.ball_mass(p, delta)
}

/// `(n+1)^{|X|} 2^{-2 n delta^2}`, the concentration bound on `1 - typicality_mass`.
pub fn typicality_bound(alphabet: usize, n: usize, delta: f64) -> f64 {
    ((alphabet as f64) * ((n + 1) as f64).log2() - 2.0 * n as f64 * delta * delta).exp2()
}

/// `delta_n = sqrt(|X| / (2n) log((n+1)/eta))`.
pub fn delta_n(n: usize, alphabet: usize, eta: f64) -> Result<f64> {
    if n == 0 || !(eta > 0.0 && eta < 1.0) {
        return precondition("need n >= 1 and eta in (0, 1)");
    }
    Ok((alphabet as f64 / (2.0 * n as f64) * (((n + 1) as f64) / eta).log2()).sqrt())
}

/// `2^{-n g((2 delta + 1/n) |X|)}`, the spill-over floor of the kernel on the ball.
pub fn spill_over_floor(n: usize, alphabet: usize, delta: f64) -> f64 {
    let nf = n as f64;
    (-nf * bosonic_entropy((2.0 * delta + 1.0 / nf) * alphabet as f64)).exp2()
}

/// Both sides of the one-shot blurring inequality for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurringLemmaCheck {
    pub verdict: Verdict,
    pub n: usize,
    pub alphabet: usize,
    pub m: usize,
    pub delta: f64,
    pub eta: f64,
    /// `p_n` mass on the ball.
    pub concentration: f64,
    /// `q_n` mass on the ball.
    pub q_ball_mass: f64,
    #[serde(with = "crate::report::extended_f64")]
    pub lhs: f64,
    #[serde(with = "crate::report::extended_f64")]
    pub rhs: f64,
    #[serde(with = "crate::report::extended_f64")]
    pub slack: f64,
}

/// `D_max^eta(p_n || B(q_n)) <= -log q_n(ball) + n g((2 delta + 1/n)|X|)`.
pub fn check_blurring_lemma(
    p_n: &SymmetricDistribution,
    q_n: &SymmetricDistribution,
    s: &[f64],
    delta: f64,
    eta: f64,
) -> Result<BlurringLemmaCheck> {
    let kernel = blur_kernel(p_n.n, robust_ceil(2.0 * delta * p_n.n as f64), p_n.alphabet)?;
    check_blurring_lemma_with(&kernel, p_n, q_n, s, delta, eta)
}

/// As [`check_blurring_lemma`] with a prebuilt kernel (its `m` must be `ceil(2 delta n)`).
pub fn check_blurring_lemma_with(
    kernel: &BlurKernel,
    p_n: &SymmetricDistribution,
    q_n: &SymmetricDistribution,
    s: &[f64],
    delta: f64,
    eta: f64,
) -> Result<BlurringLemmaCheck> {
    if p_n.n != q_n.n || p_n.alphabet != q_n.alphabet || s.len() != p_n.alphabet {
        return Err(Error::DimensionMismatch("p_n, q_n and s must share n and the alphabet".into()));
    }
    validate_distribution(s)?;
    if !(delta > 0.0) || !(eta > 0.0 && eta < 1.0) {
        return precondition("need delta > 0 and eta in (0, 1)");
    }
    let n = p_n.n;
    let m = robust_ceil(2.0 * delta * n as f64);
    if kernel.m != m || kernel.n != n || kernel.alphabet != p_n.alphabet {
        return precondition(format!("kernel must have n = {n}, m = {m}"));
    }
    let concentration = p_n.ball_mass(s, delta)?;
    let q_ball_mass = q_n.ball_mass(s, delta)?;
    let mut out = BlurringLemmaCheck {
        verdict: Verdict::Inapplicable,
        n,
        alphabet: p_n.alphabet,
        m,
        delta,
        eta,
        concentration,
        q_ball_mass,
        lhs: f64::NAN,
        rhs: f64::NAN,
        slack: f64::NAN,
    };
    if concentration < 1.0 - eta - 1e-12 {
        return Ok(out);
    }
    let g_term = n as f64 * bosonic_entropy((2.0 * delta + 1.0 / n as f64) * p_n.alphabet as f64);
    out.rhs = if q_ball_mass > 0.0 { -q_ball_mass.log2() + g_term } else { f64::INFINITY };
    let blurred = apply_blur(kernel, q_n)?;
    let lhs = d_max_smoothed_classical(&p_n.weights, &blurred.weights, eta)?;
    out.lhs = if lhs.infinite { f64::INFINITY } else { lhs.value };
    out.slack = out.rhs - out.lhs;
    out.verdict = if out.rhs == f64::INFINITY || out.lhs <= out.rhs + 1e-8 { Verdict::Pass } else { Verdict::Fail };
    Ok(out)
}

/// One seeded random instance of the blurring lemma: `n <= max_n`,
/// `|X| <= max_alphabet`, `delta` in `[0.05, 0.3]`, `eta` set from the
/// measured concentration. Draws whose ball carries under 2% of `p_n` would
/// make the lemma vacuous and are redrawn.
pub fn random_blurring_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_n: usize,
    max_alphabet: usize,
) -> Result<(SymmetricDistribution, SymmetricDistribution, Vec<f64>, f64, f64)> {
    let mut last = None;
    for _ in 0..64 {
        let inst = draw_blurring_instance(rng, max_n, max_alphabet)?;
        if inst.4 < 0.98 {
            return Ok(inst);
        }
        last = Some(inst);
    }
    Ok(last.expect("at least one draw"))
}

fn draw_blurring_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_n: usize,
    max_alphabet: usize,
) -> Result<(SymmetricDistribution, SymmetricDistribution, Vec<f64>, f64, f64)> {
    let alphabet = rng.gen_range(2..=max_alphabet.max(2));
    let n = rng.gen_range(2..=max_n.max(2));
    let delta = rng.gen_range(0.05..=0.3);
    let s = dirichlet(alphabet, rng);
    // p_n: i.i.d. near s, mixed with a little arbitrary mass.
    let near: Vec<f64> = {
        let jitter = dirichlet(alphabet, rng);
        let a = rng.gen_range(0.0..0.3);
        s.iter().zip(&jitter).map(|(x, j)| (1.0 - a) * x + a * j).collect()
    };
    let iid = SymmetricDistribution::iid(&near, n)?;
    let noise = SymmetricDistribution::random(n, alphabet, rng)?;
    let mix = rng.gen_range(0.0..0.2);
    let pw: Vec<f64> = iid.weights.iter().zip(&noise.weights).map(|(a, b)| (1.0 - mix) * a + mix * b).collect();
    let mut pw = pw;
    normalise(&mut pw);
    let p_n = SymmetricDistribution { n, alphabet, weights: pw };
    let q_n = SymmetricDistribution::random(n, alphabet, rng)?;
    let conc = p_n.ball_mass(&s, delta)?;
    let eta = ((1.0 - conc) + rng.gen_range(0.001..0.05)).clamp(1e-3, 0.99);
    Ok((p_n, q_n, s, delta, eta))
}

/// Level-1 distributions of a classical product family.
fn classical_level1(family: &FreeFamily) -> Result<Vec<Vec<f64>>> {
    if family.rule() != FamilyRule::ProductOfGenerators {
        return precondition("classical Stein check needs a product family");
    }
    family
        .level(1)?
        .iter()
        .map(|g| {
            let m = g.matrix();
            let d = g.dim();
            if (0..d).any(|i| (0..d).any(|j| i != j && m[(i, j)].norm() > 1e-12)) {
                return precondition("classical Stein check needs diagonal generators");
            }
            Ok(g.real_diagonal())
        })
        .collect()
}

/// Type-space images of the symmetrised level-`n` product generators: one
/// per multiset of level-1 generators, each the law of the type of a
/// sequence of independent symbols drawn from the chosen generators.
pub fn symmetrised_product_generators(level1: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    let k = level1.len();
    let alphabet = level1[0].len();
    let index = TypeIndex::new(n, alphabet)?;
    let mut multisets = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn walk(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for j in start..k {
            cur.push(j);
            walk(j, k, n, cur, out);
            cur.pop();
        }
    }
    walk(0, k, n, &mut cur, &mut multisets);
    if multisets.len() > 50_000 {
        return Err(Error::SizeGuard(format!("{} symmetrised generators", multisets.len())));
    }
    Ok(multisets
        .par_iter()
        .map(|ms| {
            // Law of partial type counts, grown one symbol at a time.
            let mut law: std::collections::HashMap<Vec<usize>, f64> = std::collections::HashMap::new();
            law.insert(vec![0; alphabet], 1.0);
            for &j in ms {
                let mut next = std::collections::HashMap::with_capacity(law.len() * alphabet);
                for (counts, pr) in &law {
                    for (x, &px) in level1[j].iter().enumerate() {
                        if px > 0.0 {
                            let mut c = counts.clone();
                            c[x] += 1;
                            *next.entry(c).or_insert(0.0) += pr * px;
                        }
                    }
                }
                law = next;
            }
            let mut v = vec![0.0; index.len()];
            for (counts, pr) in law {
                v[index.position(&counts).expect("full-length types")] += pr;
            }
            v
        })
        .collect())
}

/// Smoothed `D_max^eps` of a symmetric distribution to the hull of
/// type-space generators: `max(0, Dtilde^eps)` on the normalised ball.
pub fn d_max_smoothed_to_type_hull(p: &[f64], gens: &[Vec<f64>], eps: f64, opts: &HullOptions) -> Result<Bracket> {
    let rho = DenseOperator::diagonal(p);
    let gens: Vec<DenseOperator> = gens.iter().map(|g| DenseOperator::diagonal(g)).collect();
    let r = dtilde_to_hull(&rho, &gens, eps, opts)?;
    if r.infinite {
        return Ok(Bracket::exact(f64::INFINITY));
    }
    Ok(Bracket::new(r.certificate.lower.max(0.0), r.certificate.upper.max(0.0)))
}

/// All terms of the one-shot generalised classical Stein inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalGslCheck {
    pub verdict: Verdict,
    pub n: usize,
    pub eps: f64,
    pub eta: f64,
    pub delta_n: f64,
    pub c: f64,
    /// `D_max^eta(p^{⊗n} || F_n)`.
    pub lhs: Bracket,
    /// `D_max^eps(p^{⊗n} || F_n)`.
    pub smoothed_eps: Bracket,
    pub log_term: f64,
    pub g_term: f64,
    pub c_term: f64,
    /// Lower end of the right-hand side minus upper end of the left.
    pub slack: f64,
}

/// `D_max^eta(p^n||F_n) <= D_max^eps(p^n||F_n) + log 1/(1-eps-eta)
///   + 2n g((2 delta_n + 1/n)|X|) + (2 n delta_n + 1)|X| log 1/c`
/// for the product family generated by the family's level 1.
pub fn check_classical_gsl(p: &[f64], family: &FreeFamily, n: usize, eps: f64, eta: f64) -> Result<ClassicalGslCheck> {
    validate_distribution(p)?;
    if !(eps > 0.0 && eta > 0.0 && eps + eta < 1.0) {
        return precondition("need eps, eta > 0 with eps + eta < 1");
    }
    let level1 = classical_level1(family)?;
    if level1[0].len() != p.len() {
        return Err(Error::DimensionMismatch("p and the family live on different alphabets".into()));
    }
    let alphabet = p.len() as f64;
    let c = family.c();
    let dn = delta_n(n, p.len(), eta)?;
    let pn = SymmetricDistribution::iid(p, n)?;
    let gens = symmetrised_product_generators(&level1, n)?;
    let opts = HullOptions::default();
    let lhs = d_max_smoothed_to_type_hull(&pn.weights, &gens, eta, &opts)?;
    let smoothed_eps = d_max_smoothed_to_type_hull(&pn.weights, &gens, eps, &opts)?;
    let nf = n as f64;
    let log_term = -(1.0 - eps - eta).log2();
    let g_term = 2.0 * nf * bosonic_entropy((2.0 * dn + 1.0 / nf) * alphabet);
    let c_term = (2.0 * nf * dn + 1.0) * alphabet * (1.0 / c).log2();
    let rhs = smoothed_eps.shift(log_term + g_term + c_term);
    let verdict = certify_le(lhs, rhs, 1e-8);
    Ok(ClassicalGslCheck {
        verdict,
        n,
        eps,
        eta,
        delta_n: dn,
        c,
        lhs,
        smoothed_eps,
        log_term,
        g_term,
        c_term,
        slack: rhs.lo - lhs.hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_sets::build_product_family;
    use crate::types::{enumerate_types, infinity_distance};
    use num_traits::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_kernel_by_hand() {
        let k = blur_kernel(1, 1, 2).unwrap();
        // Input type (1,0): urn {0,0,1}, draw one.
        assert!((k.entry(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((k.entry(1, 0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_blur_is_identity() {
        let k = blur_kernel(5, 0, 3).unwrap();
        let id = DMatrix::<f64>::identity(k.matrix().nrows(), k.matrix().ncols());
        assert!((k.matrix() - id).amax() < 1e-15);
    }

    #[test]
    fn kernel_support_and_stochasticity() {
        let (n, m) = (6, 2);
        let k = blur_kernel(n, m, 3).unwrap();
        let types = enumerate_types(n, 3).unwrap();
        for (u, tu) in types.iter().enumerate() {
            let col: f64 = (0..types.len()).map(|t| k.entry(t, u)).sum();
            assert!((col - 1.0).abs() < 1e-12);
            for (t, tt) in types.iter().enumerate() {
                let reachable = tt.counts().iter().zip(tu.counts()).all(|(&a, &b)| a <= b + m);
                if !reachable {
                    assert_eq!(k.entry(t, u), 0.0);
                }
            }
        }
    }

    #[test]
    fn spill_over_floor_holds() {
        for (n, delta, alphabet) in [(10, 0.1, 2), (12, 0.2, 3), (20, 0.05, 2)] {
            let m = robust_ceil(2.0 * delta * n as f64);
            let k = blur_kernel(n, m, alphabet).unwrap();
            let s = vec![1.0 / alphabet as f64; alphabet];
            let index = TypeIndex::new(n, alphabet).unwrap();
            let floor = spill_over_floor(n, alphabet, delta);
            let ball: Vec<usize> = index
                .types()
                .iter()
                .enumerate()
                .filter(|(_, t)| infinity_distance(t, &s).unwrap() <= delta + 1e-12)
                .map(|(i, _)| i)
                .collect();
            for &u in &ball {
                for &t in &ball {
                    assert!(k.entry(t, u) >= floor * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn exact_kernel_matches_float() {
        let f = blur_kernel(4, 2, 2).unwrap();
        let e = exact_blur_kernel(4, 2, 2).unwrap();
        for (u, col) in e.iter().enumerate() {
            for (t, v) in col.iter().enumerate() {
                assert!((v.to_f64().unwrap() - f.entry(t, u)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn typicality_examples() {
        assert!((typicality_mass(&[0.5, 0.5], 10, 1.0).unwrap() - 1.0).abs() < 1e-12);
        // |k/10 - 1/2| <= 0.2 <=> 3 <= k <= 7.
        let exact: f64 = (3..=7).map(|k| crate::types::binomial_big(10, k).to_f64().unwrap() / 1024.0).sum();
        let mass = typicality_mass(&[0.5, 0.5], 10, 0.2).unwrap();
        assert!((mass - exact).abs() < 1e-12);
        assert!(1.0 - mass <= typicality_bound(2, 10, 0.2));
        for n in [5, 20, 60] {
            let eta = 0.1;
            let d = delta_n(n, 2, eta).unwrap();
            assert!(1.0 - typicality_mass(&[0.7, 0.3], n, d).unwrap() <= eta);
        }
    }

    #[test]
    fn lemma_on_iid_pair() {
        let s = [0.6, 0.4];
        let p = SymmetricDistribution::iid(&s, 20).unwrap();
        let conc = p.ball_mass(&s, 0.15).unwrap();
        let r = check_blurring_lemma(&p, &p, &s, 0.15, (1.0 - conc) + 0.01).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.lhs.is_finite() && r.slack > 1.0);
    }

    #[test]
    fn lemma_trivial_when_q_misses_ball() {
        let s = [0.5, 0.5];
        let p = SymmetricDistribution::iid(&s, 10).unwrap();
        let q = SymmetricDistribution::iid(&[1.0, 0.0], 10).unwrap();
        let conc = p.ball_mass(&s, 0.1).unwrap();
        let r = check_blurring_lemma(&p, &q, &s, 0.1, (1.0 - conc) + 0.01).unwrap();
        assert_eq!(r.rhs, f64::INFINITY);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn lemma_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (p, q, s, delta, eta) = random_blurring_instance(&mut rng, 15, 3).unwrap();
            let r = check_blurring_lemma(&p, &q, &s, delta, eta).unwrap();
            assert_ne!(r.verdict, Verdict::Fail, "{r:?}");
        }
    }

    #[test]
    fn symmetrised_generators_are_type_laws() {
        let gens = symmetrised_product_generators(&[vec![0.7, 0.3], vec![0.2, 0.8]], 3).unwrap();
        assert_eq!(gens.len(), 4);
        let iid = SymmetricDistribution::iid(&[0.7, 0.3], 3).unwrap();
        for (a, b) in gens[0].iter().zip(iid.weights()) {
            assert!((a - b).abs() < 1e-14);
        }
        for g in &gens {
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_gsl_examples() {
        let uniform = DenseOperator::diagonal(&[0.5, 0.5]);
        let fam = build_product_family(vec![uniform], 1).unwrap();
        let r = check_classical_gsl(&[0.75, 0.25], &fam, 12, 0.3, 0.1).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.slack > 0.0);
        let simplex = build_product_family(vec![DenseOperator::diagonal(&[1.0, 0.0]), DenseOperator::diagonal(&[0.0, 1.0])], 1).unwrap();
        let r = check_classical_gsl(&[0.5, 0.5], &simplex, 6, 0.2, 0.1).unwrap();
        assert!(r.lhs.hi < 1e-6 && r.smoothed_eps.hi < 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
    }
}
