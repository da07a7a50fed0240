//! Primal log-barrier Newton method for small problems of the form
//! `min c.x` subject to linear matrix inequalities and scalar linear
//! inequalities. Callers supply a strictly feasible start and derive their
//! own dual certificates from the returned point.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::linalg::{CMat, HermitianCholesky};

/// `base + sum_j x_j F_j >= 0`.
pub(crate) struct Lmi {
    pub base: CMat,
    pub terms: Vec<(usize, CMat)>,
}

/// `offset + sum_j a_j x_j >= 0` (sparse coefficients).
pub(crate) struct Linear {
    pub coeffs: Vec<(usize, f64)>,
    pub offset: f64,
}

pub(crate) struct Problem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub lmis: Vec<Lmi>,
    pub linear: Vec<Linear>,
}

pub(crate) struct Solution {
    pub x: Vec<f64>,
    /// Final barrier weight; the central-path gap is `theta / t`.
    pub t: f64,
    pub theta: f64,
    pub newton_steps: usize,
}

impl Lmi {
    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut m = self.base.clone();
        for (j, f) in &self.terms {
            m += f.scale(x[*j]);
        }
        m
    }
}

impl Linear {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.offset + self.coeffs.iter().map(|(j, a)| a * x[*j]).sum::<f64>()
    }
}

impl Problem {
    fn theta(&self) -> f64 {
        (self.lmis.iter().map(|l| l.base.nrows()).sum::<usize>() + self.linear.len()) as f64
    }

    /// Barrier value, `None` outside the interior.
    fn barrier(&self, x: &[f64]) -> Option<f64> {
        let mut v = 0.0;
        for lmi in &self.lmis {
            let f = lmi.eval(x);
            v -= HermitianCholesky::new(&f)?.ln_det();
        }
        for lin in &self.linear {
            let s = lin.eval(x);
            if !(s > 0.0) {
                return None;
            }
            v -= s.ln();
        }
        Some(v)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn grad_hess(&self, x: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n_vars;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for lmi in &self.lmis {
            let f = lmi.eval(x);
            let inv = HermitianCholesky::new(&f)?.inverse();
            let gs: Vec<(usize, CMat)> = lmi.terms.iter().map(|(j, fj)| (*j, &inv * fj)).collect();
            for (a, (ja, ga)) in gs.iter().enumerate() {
                g[*ja] -= ga.trace().re;
                for (jb, gb) in gs.iter().skip(a) {
                    // Re Tr(G_a G_b) = Re sum_{pq} G_a[p,q] G_b[q,p]
                    let mut acc = 0.0;
                    let dim = ga.nrows();
                    for p in 0..dim {
                        for q in 0..dim {
                            acc += (ga[(p, q)] * gb[(q, p)]).re;
                        }
                    }
                    h[(*ja, *jb)] += acc;
                    if ja != jb {
                        h[(*jb, *ja)] += acc;
                    }
                }
            }
        }
        for lin in &self.linear {
            let s = lin.eval(x);
            if !(s > 0.0) {
                return None;
            }
            for &(i, ai) in &lin.coeffs {
                g[i] -= ai / s;
                for &(j, aj) in &lin.coeffs {
                    h[(i, j)] += ai * aj / (s * s);
                }
            }
        }
        Some((g, h))
    }
}

/// Runs the barrier method from a strictly feasible `x0` until the
/// central-path gap `theta / t` drops below `rel_gap * |c.x|`.
#[allow(dead_code)]
pub(crate) fn solve(p: &Problem, x0: Vec<f64>, rel_gap: f64, max_newton: usize) -> Solution {
    solve_observed(p, x0, rel_gap, max_newton, |_| {})
}

/// [`solve`], calling `observe` with the point reached after every centering
/// stage. Dual certificates built from moderately large `t` are often more
/// accurate than the final one, whose slack matrices are nearly singular.
pub(crate) fn solve_observed(
    p: &Problem,
    x0: Vec<f64>,
    rel_gap: f64,
    max_newton: usize,
    mut observe: impl FnMut(&[f64]),
) -> Solution {
    let theta = p.theta();
    let mut x = x0;
    let scale = p.objective(&x).abs().max(1e-12);
    let mut t = theta / scale;
    let mut steps = 0usize;
    loop {
        // Centering.
        for _ in 0..60 {
            if steps >= max_newton {
                break;
            }
            let Some((gb, h)) = p.grad_hess(&x) else { break };
            let c = DVector::from_column_slice(&p.objective);
            let g = c.scale(t) + gb;
            let dx = match Cholesky::new(h.clone()) {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    let ridge = 1e-12 * h.trace().abs().max(1e-300);
                    let hr = h + DMatrix::identity(p.n_vars, p.n_vars).scale(ridge);
                    match Cholesky::new(hr) {
                        Some(ch) => ch.solve(&(-&g)),
                        None => break,
                    }
                }
            };
            steps += 1;
            let dec = -g.dot(&dx);
            if !(dec > 0.0) || dec / 2.0 < 1e-11 {
                break;
            }
            // Compare changes, not totals: `t c.x` dwarfs the barrier late on.
            let b0 = p.barrier(&x).unwrap_or(f64::INFINITY);
            let slope = t * c.dot(&dx);
            let mut s = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + s * b).collect();
                if let Some(bv) = p.barrier(&trial) {
                    if s * slope + (bv - b0) <= -0.25 * s * dec {
                        x = trial;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved {
                break;
            }
        }
        observe(&x);
        let obj = p.objective(&x).abs().max(1e-300);
        if theta / t <= rel_gap * obj || steps >= max_newton || t > 1e18 {
            break;
        }
        t *= 8.0;
    }
    Solution { x, t, theta, newton_steps: steps }
}
