//! Divergences from a state to the convex hull of finitely many generators.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::barrier::{self, Linear, Lmi, Problem};
use super::{check_eps, threshold_mu, Certificate, DivergenceResult, Witness};
use crate::linalg::{eigh_unchecked, CMat, DenseOperator, HermitianSpectrum, C64};
use crate::{precondition, tolerances, Error, Result};

/// Optimiser settings for hull divergences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullOptions {
    /// Frank–Wolfe iteration cap.
    pub max_iter: usize,
    /// Frank–Wolfe duality-gap target (bits).
    pub gap_tol: f64,
    /// Enable away steps in Frank–Wolfe.
    pub away_steps: bool,
    /// Relative central-path gap for the barrier solver.
    pub rel_gap: f64,
    /// Newton step cap for the barrier solver.
    pub max_newton: usize,
}

impl Default for HullOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, gap_tol: 1e-6, away_steps: true, rel_gap: 1e-10, max_newton: 3000 }
    }
}

fn is_diagonal(m: &CMat) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() <= 1e-14))
}

/// Validated input restricted to the support of the uniform generator mixture.
struct Prepared {
    rho: CMat,
    gens: Vec<CMat>,
    diagonal: bool,
    /// Mass of `rho` outside the support of the hull.
    outside: f64,
}

fn prepare(rho: &DenseOperator, gens: &[DenseOperator]) -> Result<Prepared> {
    if gens.is_empty() {
        return precondition("hull needs at least one generator");
    }
    rho.validate_state()?;
    for g in gens {
        if g.dim() != rho.dim() {
            return Err(Error::DimensionMismatch(format!("generator dimension {} vs {}", g.dim(), rho.dim())));
        }
        g.validate_state()?;
    }
    let dim = rho.dim();
    let ker = tolerances().kernel;
    let mut uniform = CMat::zeros(dim, dim);
    for g in gens {
        uniform += g.matrix();
    }
    uniform /= C64::new(gens.len() as f64, 0.0);
    let diagonal = is_diagonal(rho.matrix()) && gens.iter().all(|g| is_diagonal(g.matrix()));
    let basis: CMat = if diagonal {
        let keep: Vec<usize> = (0..dim).filter(|&i| uniform[(i, i)].re > ker).collect();
        let mut v = CMat::zeros(dim, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            v[(i, c)] = C64::new(1.0, 0.0);
        }
        v
    } else {
        let sp = eigh_unchecked(&uniform);
        let rank = sp.values.iter().filter(|&&l| l > ker).count();
        sp.vectors.columns(0, rank).into_owned()
    };
    let restrict = |m: &CMat| -> CMat {
        let r = basis.adjoint() * m * &basis;
        (&r + r.adjoint()).scale(0.5)
    };
    let rho_r = restrict(rho.matrix());
    let outside = (rho.trace().re - rho_r.trace().re).max(0.0);
    Ok(Prepared { rho: rho_r, gens: gens.iter().map(|g| restrict(g.matrix())).collect(), diagonal, outside })
}

fn mixture(gens: &[CMat], w: &[f64]) -> CMat {
    let dim = gens[0].nrows();
    let mut m = CMat::zeros(dim, dim);
    for (g, &wi) in gens.iter().zip(w) {
        if wi != 0.0 {
            m += g.scale(wi);
        }
    }
    m
}

fn diag(m: &CMat) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)].re).collect()
}

/// Initial scale `mu0` with `rho <= mu0 * uniform`.
fn initial_mu(p: &Prepared) -> f64 {
    let m = p.gens.len() as f64;
    let mut u = CMat::zeros(p.rho.nrows(), p.rho.nrows());
    for g in &p.gens {
        u += g;
    }
    u /= C64::new(m, 0.0);
    let sp = eigh_unchecked(&u);
    let mut r = sp.vectors.adjoint() * &p.rho * &sp.vectors;
    let n = r.nrows();
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] /= (sp.values[i] * sp.values[j]).max(1e-300).sqrt();
        }
    }
    eigh_unchecked(&r).max().max(1e-300)
}

fn hermitian_basis(dim: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        let mut e = CMat::zeros(dim, dim);
        e[(a, a)] = C64::new(1.0, 0.0);
        out.push(e);
    }
    for a in 0..dim {
        for b in (a + 1)..dim {
            let mut re = CMat::zeros(dim, dim);
            re[(a, b)] = C64::new(1.0, 0.0);
            re[(b, a)] = C64::new(1.0, 0.0);
            out.push(re);
            let mut im = CMat::zeros(dim, dim);
            im[(a, b)] = C64::new(0.0, -1.0);
            im[(b, a)] = C64::new(0.0, 1.0);
            out.push(im);
        }
    }
    out
}

fn max_tr(z: &CMat, gens: &[CMat]) -> f64 {
    gens.iter().map(|g| (z * g).trace().re).fold(f64::NEG_INFINITY, f64::max)
}

/// `D_max(rho || conv(gens))` with a certified bracket.
pub fn d_max_to_hull(rho: &DenseOperator, gens: &[DenseOperator], opts: &HullOptions) -> Result<DivergenceResult> {
    let p = prepare(rho, gens)?;
    if p.outside > 1e-10 {
        return Ok(DivergenceResult::infinite("rho is not supported on the hull"));
    }
    smoothed_max_to_hull(&p, 0.0, opts)
}

/// `Dtilde_max^eps(rho || conv(gens))` with a certified bracket.
pub fn dtilde_to_hull(
    rho: &DenseOperator,
    gens: &[DenseOperator],
    eps: f64,
    opts: &HullOptions,
) -> Result<DivergenceResult> {
    check_eps(eps)?;
    let p = prepare(rho, gens)?;
    if p.outside > eps + 1e-12 {
        return Ok(DivergenceResult::infinite("mass outside the hull support exceeds eps"));
    }
    if p.outside > 1e-10 {
        return precondition("rho leaks outside the hull support; only supported states are handled");
    }
    smoothed_max_to_hull(&p, eps, opts)
}

/// Solves `min sum y` s.t. `sum y_i sigma_i + Delta >= rho`, `Delta >= 0`,
/// `Tr Delta <= eps`, `y >= 0` (no `Delta` when `eps = 0`).
fn smoothed_max_to_hull(p: &Prepared, eps: f64, opts: &HullOptions) -> Result<DivergenceResult> {
    let m = p.gens.len();
    let dim = p.rho.nrows();
    if dim == 0 {
        return Ok(DivergenceResult::exact(f64::NEG_INFINITY));
    }
    let mu0 = initial_mu(p);
    let smooth = eps > 0.0;
    let mut x0 = vec![2.0 * mu0 / m as f64 + 1e-9; m];
    let mut problem = Problem { n_vars: m, objective: vec![1.0; m], lmis: vec![], linear: vec![] };
    for i in 0..m {
        problem.linear.push(Linear { coeffs: vec![(i, 1.0)], offset: 0.0 });
    }
    // Index of the first Delta variable.
    let d0 = m;
    if p.diagonal {
        let rho_d = diag(&p.rho);
        let gen_d: Vec<Vec<f64>> = p.gens.iter().map(diag).collect();
        for x in 0..dim {
            let mut coeffs: Vec<(usize, f64)> =
                (0..m).filter(|&i| gen_d[i][x] != 0.0).map(|i| (i, gen_d[i][x])).collect();
            if smooth {
                coeffs.push((d0 + x, 1.0));
            }
            problem.linear.push(Linear { coeffs, offset: -rho_d[x] });
        }
        if smooth {
            for x in 0..dim {
                problem.linear.push(Linear { coeffs: vec![(d0 + x, 1.0)], offset: 0.0 });
                x0.push(eps / (2.0 * dim as f64));
            }
            problem.linear.push(Linear { coeffs: (0..dim).map(|x| (d0 + x, -1.0)).collect(), offset: eps });
            problem.n_vars += dim;
            problem.objective.extend(std::iter::repeat(0.0).take(dim));
        }
    } else {
        let mut terms: Vec<(usize, CMat)> = p.gens.iter().cloned().enumerate().collect();
        if smooth {
            let basis = hermitian_basis(dim);
            let mut delta_terms = Vec::new();
            let mut trace_coeffs = Vec::new();
            for (k, b) in basis.into_iter().enumerate() {
                let tr = b.trace().re;
                if tr != 0.0 {
                    trace_coeffs.push((d0 + k, -tr));
                }
                x0.push(if tr != 0.0 { eps / (2.0 * dim as f64) } else { 0.0 });
                terms.push((d0 + k, b.clone()));
                delta_terms.push((d0 + k, b));
            }
            problem.lmis.push(Lmi { base: CMat::zeros(dim, dim), terms: delta_terms });
            problem.linear.push(Linear { coeffs: trace_coeffs, offset: eps });
            problem.n_vars += dim * dim;
            problem.objective.extend(std::iter::repeat(0.0).take(dim * dim));
        }
        problem.lmis.insert(0, Lmi { base: -p.rho.clone(), terms });
    }
    // Dual lower bounds from the inverse slack of the main constraint.
    let slack_inverse = |x: &[f64]| -> CMat {
        if p.diagonal {
            let mut z = CMat::zeros(dim, dim);
            let rho_d = diag(&p.rho);
            for i in 0..dim {
                let mut s = -rho_d[i] + p.gens.iter().zip(x).map(|(g, yi)| g[(i, i)].re * yi).sum::<f64>();
                if smooth {
                    s += x[d0 + i];
                }
                z[(i, i)] = C64::new(1.0 / s.max(1e-300), 0.0);
            }
            z
        } else {
            let f = problem.lmis[0].eval(x);
            crate::linalg::HermitianCholesky::new(&f)
                .map(|c| c.inverse())
                .unwrap_or_else(|| CMat::identity(dim, dim))
        }
    };
    let diag_data = p.diagonal.then(|| (diag(&p.rho), p.gens.iter().map(diag).collect::<Vec<_>>()));
    let mut best_dual = f64::NEG_INFINITY;
    let sol = barrier::solve_observed(&problem, x0, opts.rel_gap, opts.max_newton, |x| {
        let bound = match &diag_data {
            Some((rho_d, gen_d)) => clipped_dual_bound_diag(&diag(&slack_inverse(x)), rho_d, gen_d, eps),
            None => clipped_dual_bound(&slack_inverse(x), &p.rho, &p.gens, eps),
        };
        best_dual = best_dual.max(bound);
    });
    let y = &sol.x[..m];
    let total: f64 = y.iter().sum();
    let weights: Vec<f64> = y.iter().map(|v| v / total).collect();

    // Primal upper bound: the mixture itself, tightened by an exact evaluation.
    let mut upper = total;
    let sigma_w = mixture(&p.gens, &weights);
    if p.diagonal {
        if let Some(mu) = threshold_mu(&diag(&p.rho), &diag(&sigma_w), eps) {
            upper = upper.min(mu);
        }
    } else if !smooth {
        let sp = eigh_unchecked(&sigma_w);
        if sp.min() > 0.0 {
            let mut r = sp.vectors.adjoint() * &p.rho * &sp.vectors;
            for i in 0..dim {
                for j in 0..dim {
                    r[(i, j)] /= (sp.values[i] * sp.values[j]).sqrt();
                }
            }
            upper = upper.min(eigh_unchecked(&r).max());
        }
    }

    // Dual lower bound from the inverse slack of the main constraint.
    let mut lower = best_dual;
    // The plain test Z = rho is also a valid dual point.
    lower = lower.max(dual_bound(&p.rho, &p.rho, &p.gens, eps));
    let floor = if smooth { (1.0 - eps).log2() } else { f64::NEG_INFINITY };
    let lo = if lower > 0.0 { lower.log2().max(floor) } else { floor };
    let hi = upper.log2();
    let converged = sol.theta / sol.t <= opts.rel_gap * total.max(1e-300) * 10.0;
    Ok(DivergenceResult {
        value: hi,
        infinite: false,
        witness: Some(Witness::Mixture { weights }),
        certificate: Certificate {
            lower: lo.min(hi),
            upper: hi,
            iterations: sol.newton_steps,
            converged,
            note: None,
        },
    })
}

/// `(Tr Z rho - eps lambda_max(Z)) / max_i Tr Z sigma_i`, a lower bound on
/// the optimal `sum y` for any `Z >= 0`.
fn dual_bound(z: &CMat, rho: &CMat, gens: &[CMat], eps: f64) -> f64 {
    let denom = max_tr(z, gens);
    if !(denom > 0.0) {
        return 0.0;
    }
    let lam = if eps > 0.0 { eigh_unchecked(z).max() } else { 0.0 };
    ((z * rho).trace().re - eps * lam) / denom
}

/// Best [`dual_bound`] over the spectral clippings `min(Z, nu)`, with `nu`
/// ranging over the eigenvalues of `Z`.
fn clipped_dual_bound(z: &CMat, rho: &CMat, gens: &[CMat], eps: f64) -> f64 {
    let base = dual_bound(z, rho, gens, eps);
    if eps == 0.0 {
        return base;
    }
    let sp = eigh_unchecked(z);
    sp.values
        .iter()
        .filter(|&&nu| nu > 0.0)
        .map(|&nu| {
            let clipped = sp.map(|l| l.clamp(0.0, nu));
            dual_bound(clipped.matrix(), rho, gens, eps)
        })
        .fold(base, f64::max)
}

/// [`clipped_dual_bound`] for diagonal data, on vectors.
fn clipped_dual_bound_diag(z: &[f64], rho: &[f64], gens: &[Vec<f64>], eps: f64) -> f64 {
    let bound = |nu: f64| {
        let zc: Vec<f64> = z.iter().map(|&v| v.clamp(0.0, nu)).collect();
        let dot = |a: &[f64]| zc.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
        let denom = gens.iter().map(|g| dot(g)).fold(f64::NEG_INFINITY, f64::max);
        if !(denom > 0.0) {
            return 0.0;
        }
        let lam = if eps > 0.0 { zc.iter().copied().fold(0.0, f64::max) } else { 0.0 };
        (dot(rho) - eps * lam) / denom
    };
    let base = bound(f64::INFINITY);
    if eps == 0.0 {
        return base;
    }
    z.iter().filter(|&&nu| nu > 0.0).map(|&nu| bound(nu)).fold(base, f64::max)
}

/// Relative entropy `D(rho || conv(gens))` by Frank–Wolfe over mixture weights.
///
/// The certificate's lower bound is `f(w) - gap` (convexity); the upper
/// bound is the value at the returned weights.
pub fn rel_ent_to_hull(rho: &DenseOperator, gens: &[DenseOperator], opts: &HullOptions) -> Result<DivergenceResult> {
    let p = prepare(rho, gens)?;
    if p.outside > 1e-10 {
        return Ok(DivergenceResult::infinite("rho is not supported on the hull"));
    }
    let m = p.gens.len();
    let rlr: f64 = eigh_unchecked(&p.rho).values.iter().filter(|&&l| l > 0.0).map(|&l| l * l.log2()).sum();
    let mut w = vec![1.0 / m as f64; m];
    let mut sigma = mixture(&p.gens, &w);
    let mut state = RelEntPoint::new(&p.rho, rlr, &sigma);
    if !state.value.is_finite() {
        return Err(Error::Numerical("uniform mixture does not support rho".into()));
    }
    let mut grad: Vec<f64> = p.gens.iter().map(|g| state.directional(&p.rho, g)).collect();
    let mut gap = f64::INFINITY;
    let mut iters = 0;
    while iters < opts.max_iter {
        let gw: f64 = grad.iter().zip(&w).map(|(g, wi)| g * wi).sum();
        let (j, gj) = grad.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (i, g)| if g < a.1 { (i, g) } else { a });
        gap = (gw - gj).max(0.0);
        if gap <= opts.gap_tol {
            break;
        }
        iters += 1;
        // Direction: toward vertex j, or away from the worst active vertex.
        let mut dir: Vec<f64> = w.iter().map(|&wi| -wi).collect();
        dir[j] += 1.0;
        let mut gmax = 1.0;
        if opts.away_steps {
            let (a, ga) = grad
                .iter()
                .copied()
                .enumerate()
                .filter(|(i, _)| w[*i] > 0.0)
                .fold((0, f64::NEG_INFINITY), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
            if ga - gw > gap && w[a] < 1.0 {
                dir = w.clone();
                dir[a] -= 1.0;
                gmax = w[a] / (1.0 - w[a]);
            }
        }
        let h = mixture(&p.gens, &dir);
        let gamma = line_search(&p.rho, rlr, &sigma, &h, gmax);
        for (wi, di) in w.iter_mut().zip(&dir) {
            *wi = (*wi + gamma * di).max(0.0);
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        sigma = mixture(&p.gens, &w);
        state = RelEntPoint::new(&p.rho, rlr, &sigma);
        grad = p.gens.iter().map(|g| state.directional(&p.rho, g)).collect();
    }
    let f = state.value;
    Ok(DivergenceResult {
        value: f,
        infinite: false,
        witness: Some(Witness::Mixture { weights: w }),
        certificate: Certificate {
            lower: f - gap,
            upper: f,
            iterations: iters,
            converged: gap <= opts.gap_tol,
            note: None,
        },
    })
}

/// Value and first-derivative data of `sigma -> D(rho||sigma)` at one point.
struct RelEntPoint {
    value: f64,
    spec: HermitianSpectrum,
    /// Divided differences of the natural log on the spectrum.
    divided: DMatrix<f64>,
    rho_rot: CMat,
}

impl RelEntPoint {
    fn new(rho: &CMat, rlr: f64, sigma: &CMat) -> Self {
        let spec = eigh_unchecked(sigma);
        let n = spec.values.len();
        let rho_rot = spec.vectors.adjoint() * rho * &spec.vectors;
        // Eigenvalues below `kernel` are treated as exact zeros: rho must not
        // see them, and they drop out of the derivative.
        let kernel = 1e-13 * spec.values.first().copied().unwrap_or(0.0).max(1e-300);
        let mut value = rlr;
        for k in 0..n {
            let w = rho_rot[(k, k)].re;
            let s = spec.values[k];
            if s <= kernel {
                if w > 1e-12 {
                    value = f64::INFINITY;
                }
                continue;
            }
            value -= w * s.log2();
        }
        let mut divided = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                let (a, b) = (spec.values[k], spec.values[l]);
                if a <= kernel || b <= kernel {
                    continue;
                }
                divided[(k, l)] = if (a - b).abs() <= 1e-12 * a.max(b) { 2.0 / (a + b) } else { (a.ln() - b.ln()) / (a - b) };
            }
        }
        Self { value, spec, divided, rho_rot }
    }

    /// Directional derivative of `D(rho||sigma)` along `h` (bits).
    fn directional(&self, _rho: &CMat, h: &CMat) -> f64 {
        let hr = self.spec.vectors.adjoint() * h * &self.spec.vectors;
        let n = hr.nrows();
        let mut acc = 0.0;
        for k in 0..n {
            for l in 0..n {
                acc += (self.rho_rot[(l, k)] * hr[(k, l)]).re * self.divided[(k, l)];
            }
        }
        -acc / std::f64::consts::LN_2
    }
}

/// Exact line search on `[0, gmax]` by bisection on the directional derivative.
fn line_search(rho: &CMat, rlr: f64, sigma: &CMat, h: &CMat, gmax: f64) -> f64 {
    let deriv = |g: f64| -> f64 {
        let s = sigma + h.scale(g);
        let pt = RelEntPoint::new(rho, rlr, &s);
        if !pt.value.is_finite() || pt.spec.min() <= 0.0 {
            return f64::INFINITY;
        }
        pt.directional(rho, h)
    };
    if deriv(gmax) <= 0.0 {
        return gmax;
    }
    let (mut lo, mut hi) = (0.0, gmax);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{d_max, dtilde_max, umegaki};
    use crate::linalg::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rel_ent_hull_example() {
        let rho = DenseOperator::diagonal(&[0.75, 0.25]);
        let gens = [DenseOperator::diagonal(&[1.0, 0.0]), DenseOperator::diagonal(&[0.0, 1.0])];
        let r = rel_ent_to_hull(&rho, &gens, &HullOptions::default()).unwrap();
        assert!(r.value.abs() < 1e-6);
        let Some(Witness::Mixture { weights }) = r.witness else { panic!() };
        assert!((weights[0] - 0.75).abs() < 1e-3);
    }

    #[test]
    fn single_generator_matches_pairwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density(3, &mut rng);
        let sigma = random::density(3, &mut rng);
        let gens = [sigma.clone()];
        let o = HullOptions::default();
        let a = d_max_to_hull(&rho, &gens, &o).unwrap();
        let b = d_max(&rho, &sigma).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{} vs {}", a.value, b.value);
        let a = dtilde_to_hull(&rho, &gens, 0.2, &o).unwrap();
        let b = dtilde_max(&rho, &sigma, 0.2).unwrap();
        assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
        let a = rel_ent_to_hull(&rho, &gens, &o).unwrap();
        let b = umegaki(&rho, &sigma).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn hull_brackets_are_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let o = HullOptions::default();
        for _ in 0..5 {
            let rho = random::density(4, &mut rng);
            let gens: Vec<_> = (0..5).map(|_| random::density(4, &mut rng)).collect();
            let a = d_max_to_hull(&rho, &gens, &o).unwrap();
            assert!(a.certificate.gap() < 1e-6, "gap {}", a.certificate.gap());
            let b = dtilde_to_hull(&rho, &gens, 0.1, &o).unwrap();
            assert!(b.certificate.gap() < 1e-6, "gap {}", b.certificate.gap());
            assert!(b.value <= a.value + 1e-9);
            let c = rel_ent_to_hull(&rho, &gens, &o).unwrap();
            assert!(c.certificate.converged && c.certificate.gap() < 1e-6);
            assert!(c.value <= a.value + 1e-9);
        }
    }

    #[test]
    fn classical_hull_agrees_with_dense_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        use rand::Rng;
        let rand_dist = |rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() + 0.05).collect();
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = rand_dist(&mut rng);
        let gens: Vec<Vec<f64>> = (0..3).map(|_| rand_dist(&mut rng)).collect();
        let rho = DenseOperator::diagonal(&p);
        let diag_gens: Vec<_> = gens.iter().map(|g| DenseOperator::diagonal(g)).collect();
        // A tiny off-diagonal perturbation forces the dense path.
        let mut pert = diag_gens[0].matrix().clone();
        pert[(0, 1)] = C64::new(1e-13, 0.0);
        pert[(1, 0)] = C64::new(1e-13, 0.0);
        let mut dense_gens = diag_gens.clone();
        dense_gens[0] = DenseOperator::new(pert).unwrap();
        let o = HullOptions::default();
        let a = dtilde_to_hull(&rho, &diag_gens, 0.15, &o).unwrap();
        let b = dtilde_to_hull(&rho, &dense_gens, 0.15, &o).unwrap();
        assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
    }
}
