//! Truncated bosonic Fock spaces, the pure loss and damping channels, and the
//! second-quantised limit of the lifted blurring map.
//!
//! A [`FockOperator`] on `m` modes with cutoff `c` lives on
//! `span{|k_1,...,k_m> : k_i <= c}`; the first mode is the most significant
//! digit of the index. Pure loss and damping never raise occupations, so
//! both act exactly on the truncated space.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{eigh, trace_norm, trace_positive_part, CMat, DenseOperator, StateVector, C64, MAX_TENSOR_DIM};
use crate::quantum_blurring::{blur_q, type_index, SymTypeOperator};
use crate::report::Verdict;
use crate::types::ln_binomial;
use crate::{precondition, Error, Result};

/// Operator on the truncated Fock space of `modes` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    modes: usize,
    cutoff: usize,
    op: DenseOperator,
}

#[derive(Deserialize)]
struct RawFock {
    modes: usize,
    cutoff: usize,
    #[serde(default)]
    matrix: Option<DenseOperator>,
    /// Pure state amplitudes as `[re, im]` pairs.
    #[serde(default)]
    amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct FockRepr<'a> {
    modes: usize,
    cutoff: usize,
    matrix: &'a DenseOperator,
}

impl Serialize for FockOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FockRepr { modes: self.modes, cutoff: self.cutoff, matrix: &self.op }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawFock::deserialize(d)?;
        let op = match (raw.matrix, raw.amplitudes) {
            (Some(m), None) => m,
            (None, Some(a)) => {
                let v = StateVector::new(a.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>().into());
                DenseOperator::projector(&v)
            }
            _ => return Err(serde::de::Error::custom("give exactly one of `matrix` or `amplitudes`")),
        };
        FockOperator::new(raw.modes, raw.cutoff, op).map_err(serde::de::Error::custom)
    }
}

/// `(cutoff + 1)^modes`, guarded.
pub fn fock_dim(modes: usize, cutoff: usize) -> Result<usize> {
    if modes == 0 {
        return precondition("at least one mode is required");
    }
    let mut dim = 1usize;
    for _ in 0..modes {
        dim = dim.checked_mul(cutoff + 1).filter(|&d| d <= MAX_TENSOR_DIM).ok_or_else(|| {
            Error::SizeGuard(format!("({cutoff}+1)^{modes} exceeds {MAX_TENSOR_DIM}"))
        })?;
    }
    Ok(dim)
}

impl FockOperator {
    pub fn new(modes: usize, cutoff: usize, op: DenseOperator) -> Result<Self> {
        let dim = fock_dim(modes, cutoff)?;
        if op.dim() != dim {
            return Err(Error::DimensionMismatch(format!("operator dimension {} vs ({cutoff}+1)^{modes}", op.dim())));
        }
        Ok(Self { modes, cutoff, op })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn zeros(modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(modes, cutoff, DenseOperator::zeros(fock_dim(modes, cutoff)?))
    }

    /// `|h><k|`.
    pub fn outer(cutoff: usize, h: &[usize], k: &[usize]) -> Result<Self> {
        if h.len() != k.len() {
            return Err(Error::DimensionMismatch("occupation vectors of different length".into()));
        }
        let mut m = CMat::zeros(fock_dim(h.len(), cutoff)?, fock_dim(h.len(), cutoff)?);
        let (i, j) = (occupation_index(h, cutoff)?, occupation_index(k, cutoff)?);
        m[(i, j)] = C64::new(1.0, 0.0);
        Self::new(h.len(), cutoff, DenseOperator::from_mat(m))
    }

    pub fn vacuum(modes: usize, cutoff: usize) -> Result<Self> {
        Self::outer(cutoff, &vec![0; modes], &vec![0; modes])
    }

    pub fn from_state(modes: usize, cutoff: usize, psi: &StateVector) -> Result<Self> {
        Self::new(modes, cutoff, DenseOperator::projector(psi))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn entry(&self, h: &[usize], k: &[usize]) -> C64 {
        match (occupation_index(h, self.cutoff), occupation_index(k, self.cutoff)) {
            (Ok(i), Ok(j)) if h.len() == self.modes && k.len() == self.modes => self.op.matrix()[(i, j)],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.op)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { op: self.op.scale(a), ..*self }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_space(o)?;
        Ok(Self { op: self.op.add(&o.op)?, ..*self })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_space(o)?;
        Ok(Self { op: self.op.sub(&o.op)?, ..*self })
    }

    fn same_space(&self, o: &Self) -> Result<()> {
        if self.modes != o.modes || self.cutoff != o.cutoff {
            return Err(Error::DimensionMismatch(format!(
                "(modes, cutoff) = ({}, {}) vs ({}, {})",
                self.modes, self.cutoff, o.modes, o.cutoff
            )));
        }
        Ok(())
    }

    /// Same operator on a larger cutoff (zero-padded).
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        if cutoff < self.cutoff {
            return precondition("cutoff can only grow");
        }
        let dim = fock_dim(self.modes, cutoff)?;
        let map: Vec<usize> = (0..self.dim())
            .map(|i| occupation_index(&index_occupations(i, self.modes, self.cutoff), cutoff).expect("fits"))
            .collect();
        let mut m = CMat::zeros(dim, dim);
        for (i, &a) in map.iter().enumerate() {
            for (j, &b) in map.iter().enumerate() {
                m[(a, b)] = self.op.matrix()[(i, j)];
            }
        }
        Self::new(self.modes, cutoff, DenseOperator::from_mat(m))
    }
}

/// Index of an occupation vector.
pub fn occupation_index(occ: &[usize], cutoff: usize) -> Result<usize> {
    occ.iter().try_fold(0usize, |acc, &k| {
        if k > cutoff {
            Err(Error::Precondition(format!("occupation {k} exceeds cutoff {cutoff}")))
        } else {
            Ok(acc * (cutoff + 1) + k)
        }
    })
}

/// Occupation vector of an index.
pub fn index_occupations(mut i: usize, modes: usize, cutoff: usize) -> Vec<usize> {
    let mut occ = vec![0; modes];
    for slot in occ.iter_mut().rev() {
        *slot = i % (cutoff + 1);
        i /= cutoff + 1;
    }
    occ
}

/// `delta` together with `lambda = 1/(1 + delta(1 + delta))` and
/// `mu = sqrt(1 + delta(1 + delta))/(1 + delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub delta: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl LossParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return precondition(format!("delta must be positive, got {delta}"));
        }
        let s = 1.0 + delta * (1.0 + delta);
        Ok(Self { delta, lambda: 1.0 / s, mu: s.sqrt() / (1.0 + delta) })
    }
}

/// Applies a single-mode map, given on matrix units `|h><k|`, to one mode.
fn apply_on_mode(x: &FockOperator, mode: usize, unit: impl Fn(usize, usize) -> Vec<(usize, usize, f64)> + Sync) -> FockOperator {
    let (m, c) = (x.modes, x.cutoff);
    let dim = x.dim();
    let stride = (c + 1).pow((m - 1 - mode) as u32);
    let digit = |i: usize| (i / stride) % (c + 1);
    let src = x.op.matrix();
    let rows: Vec<CMat> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let mut acc = CMat::zeros(dim, dim);
            for j in 0..dim {
                let v = src[(i, j)];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let (h, k) = (digit(i), digit(j));
                for (h2, k2, coef) in unit(h, k) {
                    acc[(i - (h - h2) * stride, j - (k - k2) * stride)] += v * coef;
                }
            }
            acc
        })
        .collect();
    let out = rows.into_iter().fold(CMat::zeros(dim, dim), |a, b| a + b);
    FockOperator { op: DenseOperator::from_mat(out), ..*x }
}

/// Pure loss action on `|h><k|`:
/// `lambda^{(h+k)/2} sum_l sqrt(C(h,l) C(k,l)) (1/lambda - 1)^l |h-l><k-l|`.
fn loss_unit(lambda: f64, h: usize, k: usize) -> Vec<(usize, usize, f64)> {
    (0..=h.min(k))
        .map(|l| {
            let ln = ((h + k) as f64 / 2.0 - l as f64) * lambda.ln()
                + if l > 0 { l as f64 * (1.0 - lambda).ln() } else { 0.0 }
                + 0.5 * (ln_binomial(h, l) + ln_binomial(k, l));
            (h - l, k - l, ln.exp())
        })
        .collect()
}

/// Pure loss channel `E_lambda` on every mode.
pub fn pure_loss(lambda: f64, x: &FockOperator) -> Result<FockOperator> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return precondition(format!("transmissivity must lie in (0, 1), got {lambda}"));
    }
    Ok((0..x.modes).fold(x.clone(), |acc, mode| apply_on_mode(&acc, mode, |h, k| loss_unit(lambda, h, k))))
}

/// Single-mode Kraus operators `K_l = sum_h sqrt(C(h,l) lambda^{h-l} (1-lambda)^l) |h-l><h|`.
pub fn pure_loss_kraus(lambda: f64, cutoff: usize) -> Result<Vec<nalgebra::DMatrix<f64>>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return precondition(format!("transmissivity must lie in (0, 1), got {lambda}"));
    }
    Ok((0..=cutoff)
        .map(|l| {
            let mut k = nalgebra::DMatrix::zeros(cutoff + 1, cutoff + 1);
            for h in l..=cutoff {
                let ln = ln_binomial(h, l) + (h - l) as f64 * lambda.ln() + l as f64 * (1.0 - lambda).ln();
                k[(h - l, h)] = (0.5 * ln).exp();
            }
            k
        })
        .collect())
}

/// Damping `D_mu(|h><k|) = mu^{|h| + |k|} |h><k|` on every mode.
pub fn damping(mu: f64, x: &FockOperator) -> Result<FockOperator> {
    if !(mu > 0.0 && mu <= 1.0) {
        return precondition(format!("mu must lie in (0, 1], got {mu}"));
    }
    let total: Vec<usize> = (0..x.dim()).map(|i| index_occupations(i, x.modes, x.cutoff).iter().sum()).collect();
    let mut m = x.op.matrix().clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= mu.powi((total[i] + total[j]) as i32);
        }
    }
    Ok(FockOperator { op: DenseOperator::from_mat(m), ..*x })
}

/// `(E_lambda ∘ D_mu)^{⊗modes}` at `delta`.
pub fn limit_channel(delta: f64, x: &FockOperator) -> Result<FockOperator> {
    let p = LossParams::new(delta)?;
    pure_loss(p.lambda, &damping(p.mu, x)?)
}

/// `U_n |n,t> = |nt(1), ..., nt(d-1)>` into a Fock space with the given cutoff.
pub fn lift(x: &SymTypeOperator, cutoff: usize) -> Result<FockOperator> {
    let modes = x.d() - 1;
    let dim = fock_dim(modes, cutoff)?;
    let pos: Vec<Option<usize>> =
        x.index().types().iter().map(|t| occupation_index(&t.counts()[1..], cutoff).ok()).collect();
    let mut m = CMat::zeros(dim, dim);
    for (i, pi) in pos.iter().enumerate() {
        for (j, pj) in pos.iter().enumerate() {
            let v = x.matrix()[(i, j)];
            match (pi, pj) {
                (Some(a), Some(b)) => m[(*a, *b)] = v,
                _ if v.norm() > 0.0 => {
                    return precondition(format!("occupations of the input exceed cutoff {cutoff}"));
                }
                _ => {}
            }
        }
    }
    FockOperator::new(modes, cutoff, DenseOperator::from_mat(m))
}

/// `U_n^dagger X U_n`: Fock components with total occupation above `n` are
/// annihilated.
pub fn unlift(n: usize, x: &FockOperator) -> Result<SymTypeOperator> {
    let d = x.modes + 1;
    let ix = type_index(n, d)?;
    let pos: Vec<Option<usize>> =
        ix.types().iter().map(|t| occupation_index(&t.counts()[1..], x.cutoff).ok()).collect();
    let mut m = CMat::zeros(ix.len(), ix.len());
    for (i, pi) in pos.iter().enumerate() {
        for (j, pj) in pos.iter().enumerate() {
            if let (Some(a), Some(b)) = (pi, pj) {
                m[(i, j)] = x.matrix()[(*a, *b)];
            }
        }
    }
    SymTypeOperator::new(n, d, m)
}

/// Lifted blurring `U_n B_{n,delta}(U_n^dagger X U_n) U_n^dagger`.
pub fn lifted_blur(n: usize, delta: f64, x: &FockOperator) -> Result<FockOperator> {
    lift(&blur_q(delta, &unlift(n, x)?)?, x.cutoff)
}

/// Entrywise limit `<h'| lim B~_{n,delta}(|h><k|) |k'>`.
pub fn limit_entry(h: &[usize], k: &[usize], h2: &[usize], k2: &[usize], delta: f64) -> f64 {
    if h.len() != k.len() || h.len() != h2.len() || h.len() != k2.len() {
        return 0.0;
    }
    let mut v = 1.0;
    for x in 0..h.len() {
        if h2[x] > h[x] || k2[x] > k[x] || h[x] - h2[x] != k[x] - k2[x] {
            return 0.0;
        }
        let l = h[x] - h2[x];
        let ln = 0.5 * (ln_binomial(h[x], l) + ln_binomial(k[x], l)) + l as f64 * delta.ln()
            - (h[x] + k[x] - l) as f64 * (1.0 + delta).ln();
        v *= if l == 0 { (-((h[x] + k[x]) as f64) * (1.0 + delta).ln()).exp() } else { ln.exp() };
    }
    v
}

/// `lim_n B~_{n,delta}(|h><k|)` from the closed form.
pub fn limit_operator(h: &[usize], k: &[usize], delta: f64, cutoff: usize) -> Result<FockOperator> {
    if !(delta > 0.0) {
        return precondition("delta must be positive");
    }
    let mut out = FockOperator::zeros(h.len(), cutoff)?;
    occupation_index(h, cutoff)?;
    occupation_index(k, cutoff)?;
    let lmax: Vec<usize> = h.iter().zip(k).map(|(a, b)| *a.min(b)).collect();
    let mut l = vec![0usize; h.len()];
    loop {
        let h2: Vec<usize> = h.iter().zip(&l).map(|(a, b)| a - b).collect();
        let k2: Vec<usize> = k.iter().zip(&l).map(|(a, b)| a - b).collect();
        let (i, j) = (occupation_index(&h2, cutoff)?, occupation_index(&k2, cutoff)?);
        let mut m = out.op.into_matrix();
        m[(i, j)] += C64::new(limit_entry(h, k, &h2, &k2, delta), 0.0);
        out.op = DenseOperator::from_mat(m);
        // odometer over 0..=lmax
        let mut pos = 0;
        while pos < l.len() && l[pos] == lmax[pos] {
            l[pos] = 0;
            pos += 1;
        }
        if pos == l.len() {
            break;
        }
        l[pos] += 1;
    }
    Ok(out)
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub h: Vec<usize>,
    pub k: Vec<usize>,
    pub delta: f64,
    pub rows: Vec<ConvergenceRow>,
    pub strictly_decreasing: bool,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Tabulates `e_n = ||B~_{n,delta}(|h><k|) - lim||_1` over `n_grid`.
///
/// Passes when the last error is below the first (strictly decreasing when
/// nonzero) and below `threshold`; a vacuum input gives `e_n = 0`.
pub fn convergence_study(h: &[usize], k: &[usize], delta: f64, n_grid: &[usize], threshold: f64) -> Result<ConvergenceReport> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return precondition("n grid must be nonempty and strictly ascending");
    }
    let cutoff = h.iter().chain(k).copied().max().unwrap_or(0).max(1);
    let x = FockOperator::outer(cutoff, h, k)?;
    let limit = limit_operator(h, k, delta, cutoff)?;
    let rows = n_grid
        .par_iter()
        .map(|&n| Ok(ConvergenceRow { n, error: lifted_blur(n, delta, &x)?.sub(&limit)?.trace_norm() }))
        .collect::<Result<Vec<_>>>()?;
    let all_zero = rows.iter().all(|r| r.error < 1e-13);
    let strictly_decreasing = all_zero || rows.windows(2).all(|w| w[1].error < w[0].error);
    let last = rows.last().expect("nonempty").error;
    let verdict = if strictly_decreasing && last < threshold { Verdict::Pass } else { Verdict::Fail };
    Ok(ConvergenceReport { h: h.to_vec(), k: k.to_vec(), delta, rows, strictly_decreasing, threshold, verdict })
}

/// Output of the delta-averaged channel `Lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaOutput {
    pub output: FockOperator,
    pub nodes: usize,
    /// Trace-norm change when the node count is doubled.
    pub richardson_gap: f64,
    /// `richardson_gap >= 1e-8`.
    pub flagged: bool,
}

fn midpoint_average(big_delta: f64, x: &FockOperator, nodes: usize) -> Result<FockOperator> {
    let parts = (0..nodes)
        .into_par_iter()
        .map(|i| limit_channel(big_delta * (i as f64 + 0.5) / nodes as f64, x))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = FockOperator::zeros(x.modes, x.cutoff)?;
    for p in parts {
        acc = acc.add(&p)?;
    }
    Ok(acc.scale(1.0 / nodes as f64))
}

/// `Lambda(X) = int_0^Delta (d delta / Delta) (E_{lambda(delta)} ∘ D_{mu(delta)})^{⊗m}(X)`
/// by the midpoint rule, with the doubled-node comparison.
pub fn lambda_map(big_delta: f64, x: &FockOperator, nodes: usize) -> Result<LambdaOutput> {
    if !(big_delta > 0.0 && big_delta <= 0.5) {
        return precondition(format!("Delta must be in (0, 1/2], got {big_delta}"));
    }
    if nodes == 0 {
        return precondition("quadrature needs at least one node");
    }
    let output = midpoint_average(big_delta, x, nodes)?;
    let fine = midpoint_average(big_delta, x, 2 * nodes)?;
    let richardson_gap = output.sub(&fine)?.trace_norm();
    Ok(LambdaOutput { output, nodes, richardson_gap, flagged: richardson_gap >= 1e-8 })
}

/// Membership decision of a support test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Membership {
    InSupport,
    /// A unit vector in the kernel of `A` overlapping `psi` by `overlap`.
    NotInSupport { overlap: f64, witness: Vec<[f64; 2]> },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub m_grid: Vec<f64>,
    /// `f(M) = Tr(|psi><psi| - M A)_+`.
    pub values: Vec<f64>,
    pub nonincreasing: bool,
    /// `|<psi|P_ker A|psi>|`, a lower bound on every `f(M)`.
    pub kernel_overlap: f64,
    pub tol: f64,
    pub membership: Membership,
}

impl SupportReport {
    /// Smallest grid value of `M` at which `f(M) < tol`.
    pub fn first_below(&self, tol: f64) -> Option<f64> {
        self.m_grid.iter().zip(&self.values).find(|(_, &v)| v < tol).map(|(m, _)| *m)
    }
}

/// Tabulates `f(M) = Tr(|psi><psi| - M A)_+` and decides `psi in supp A`.
pub fn support_test(psi: &StateVector, a: &DenseOperator, m_grid: &[f64], tol: f64) -> Result<SupportReport> {
    if psi.dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!("vector dimension {} vs operator {}", psi.dim(), a.dim())));
    }
    a.validate_psd()?;
    let psi = psi.normalized()?;
    let p = DenseOperator::projector(&psi);
    let values = m_grid
        .iter()
        .map(|&m| trace_positive_part(&p.sub(&a.scale(m))?))
        .collect::<Result<Vec<_>>>()?;
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let sp = eigh(a)?;
    let top = sp.max().max(0.0);
    let ker_tol = 1e-13 * top.max(1e-300);
    let mut kernel = CMat::zeros(a.dim(), a.dim());
    for (j, &l) in sp.values.iter().enumerate() {
        if l <= ker_tol {
            let v = sp.vectors.column(j);
            kernel += &v * v.adjoint();
        }
    }
    let proj = &kernel * psi.amplitudes();
    let kernel_overlap = proj.norm_squared();
    let last = values.last().copied().unwrap_or(f64::INFINITY);
    let membership = if kernel_overlap > tol {
        let w = proj.unscale(kernel_overlap.sqrt());
        Membership::NotInSupport { overlap: kernel_overlap, witness: w.iter().map(|z| [z.re, z.im]).collect() }
    } else if last < tol {
        Membership::InSupport
    } else {
        Membership::Undecided
    };
    Ok(SupportReport { m_grid: m_grid.to_vec(), values, nonincreasing, kernel_overlap, tol, membership })
}

/// Truncated coherent state `e^{-|alpha|^2/2} sum_k alpha^k/sqrt(k!) |k>`,
/// renormalised, with the discarded norm squared.
pub fn coherent_state(alpha: C64, cutoff: usize) -> (StateVector, f64) {
    let r2 = alpha.norm_sqr();
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut term = C64::new((-r2 / 2.0).exp(), 0.0);
    for k in 0..=cutoff {
        amps.push(term);
        term *= alpha / ((k + 1) as f64).sqrt();
    }
    let v = StateVector::new(amps.into());
    let kept = v.norm().powi(2);
    (v.normalized().expect("nonzero"), (1.0 - kept).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VacuumSupportReport {
    pub big_delta: f64,
    pub nodes: usize,
    pub richardson_gap: f64,
    pub quadrature_flagged: bool,
    pub support: SupportReport,
    pub verdict: Verdict,
}

/// `support_test(vacuum, Lambda(rho))`; passes when `f` is nonincreasing and
/// drops below `tol` somewhere on the grid.
pub fn vacuum_support_experiment(
    rho: &FockOperator,
    big_delta: f64,
    nodes: usize,
    m_grid: &[f64],
    tol: f64,
) -> Result<VacuumSupportReport> {
    rho.operator().validate_state()?;
    let lam = lambda_map(big_delta, rho, nodes)?;
    let vac = StateVector::basis(rho.dim(), 0);
    let support = support_test(&vac, lam.output.operator(), m_grid, tol)?;
    let verdict = if support.nonincreasing && support.membership == Membership::InSupport {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VacuumSupportReport {
        big_delta,
        nodes,
        richardson_gap: lam.richardson_gap,
        quadrature_flagged: lam.flagged,
        support,
        verdict,
    })
}

/// Fixed-`delta` experiment on a coherent input: `E_{lambda(delta)}` maps
/// `|alpha>` to `|sqrt(lambda) alpha>`, so `f(M)` cannot drop below
/// `1 - e^{-lambda |alpha|^2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentCounterexample {
    pub alpha: f64,
    pub delta: f64,
    pub lambda: f64,
    pub cutoff: usize,
    /// Norm squared discarded by the truncation.
    pub truncation: f64,
    pub analytic_floor: f64,
    pub min_value: f64,
    pub support: SupportReport,
    pub margin: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggested_cutoff: Option<usize>,
}

pub fn coherent_counterexample(alpha: f64, delta: f64, cutoff: usize, m_grid: &[f64], margin: f64) -> Result<CoherentCounterexample> {
    let p = LossParams::new(delta)?;
    let (psi, truncation) = coherent_state(C64::new(alpha, 0.0), cutoff);
    let rho = FockOperator::from_state(1, cutoff, &psi)?;
    let out = pure_loss(p.lambda, &rho)?;
    let support = support_test(&StateVector::basis(cutoff + 1, 0), out.operator(), m_grid, 0.05)?;
    let analytic_floor = 1.0 - (-p.lambda * alpha * alpha).exp();
    let min_value = support.values.iter().copied().fold(f64::INFINITY, f64::min);
    let (verdict, suggested_cutoff) = if truncation > 1e-6 {
        (Verdict::Inconclusive, Some(2 * cutoff))
    } else if min_value >= analytic_floor - margin {
        (Verdict::Pass, None)
    } else {
        (Verdict::Fail, None)
    };
    Ok(CoherentCounterexample {
        alpha,
        delta,
        lambda: p.lambda,
        cutoff,
        truncation,
        analytic_floor,
        min_value,
        support,
        margin,
        verdict,
        suggested_cutoff,
    })
}

/// Haar-random pure state on one mode with the given cutoff.
pub fn random_pure_fock<R: Rng + ?Sized>(cutoff: usize, rng: &mut R) -> Result<FockOperator> {
    let psi = crate::linalg::random::pure_state(cutoff + 1, rng);
    FockOperator::from_state(1, cutoff, &psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TypeVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &FockOperator, b: &FockOperator, tol: f64) -> bool {
        a.sub(b).unwrap().operator().max_abs() < tol
    }

    #[test]
    fn loss_params_identities() {
        for i in 1..=50 {
            let p = LossParams::new(i as f64 / 100.0).unwrap();
            assert!((p.lambda.sqrt() * p.mu - 1.0 / (1.0 + p.delta)).abs() < 1e-12);
            assert!((1.0 / p.lambda - 1.0 - p.delta * (1.0 + p.delta)).abs() < 1e-12);
        }
        assert!(LossParams::new(0.0).is_err());
    }

    #[test]
    fn pure_loss_examples() {
        let vac = FockOperator::vacuum(1, 5).unwrap();
        assert!(close(&pure_loss(0.3, &vac).unwrap(), &vac, 1e-15));
        let one = FockOperator::outer(5, &[1], &[1]).unwrap();
        let want = one.scale(0.3).add(&vac.scale(0.7)).unwrap();
        assert!(close(&pure_loss(0.3, &one).unwrap(), &want, 1e-15));
        assert!(pure_loss(1.0, &one).is_err());
        let kraus = pure_loss_kraus(0.37, 9).unwrap();
        let sum = kraus.iter().fold(nalgebra::DMatrix::zeros(10, 10), |a, k| a + k.transpose() * k);
        assert!((sum - nalgebra::DMatrix::<f64>::identity(10, 10)).abs().max() < 1e-12);
        // Kraus and entrywise forms agree
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = FockOperator::new(1, 9, crate::linalg::random::density(10, &mut rng)).unwrap();
        let mut via = CMat::zeros(10, 10);
        for k in &kraus {
            let kc = k.map(|v| C64::new(v, 0.0));
            via += &kc * x.matrix() * kc.adjoint();
        }
        assert!((via - pure_loss(0.37, &x).unwrap().matrix()).iter().all(|z| z.norm() < 1e-13));
        assert!((pure_loss(0.37, &x).unwrap().trace().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn coherent_maps_to_coherent() {
        let (psi, trunc) = coherent_state(C64::new(1.2, 0.3), 30);
        assert!(trunc < 1e-15);
        let out = pure_loss(0.6, &FockOperator::from_state(1, 30, &psi).unwrap()).unwrap();
        let (phi, _) = coherent_state(C64::new(1.2, 0.3) * 0.6f64.sqrt(), 30);
        let want = FockOperator::from_state(1, 30, &phi).unwrap();
        assert!(out.sub(&want).unwrap().trace_norm() < 1e-10);
        let lam: f64 = 0.6;
        let vac_overlap = out.matrix()[(0, 0)].re;
        assert!((vac_overlap - (-lam * C64::new(1.2, 0.3).norm_sqr()).exp()).abs() < 1e-12);
    }

    #[test]
    fn damping_examples() {
        let one = FockOperator::outer(3, &[1, 2], &[1, 0]).unwrap();
        assert!(close(&damping(1.0, &one).unwrap(), &one, 1e-300));
        assert!(close(&damping(0.5, &one).unwrap(), &one.scale(0.5f64.powi(4)), 1e-16));
        let single = FockOperator::outer(3, &[1], &[1]).unwrap();
        assert!(close(&damping(0.7, &single).unwrap(), &single.scale(0.49), 1e-16));
    }

    #[test]
    fn lift_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vac = SymTypeOperator::outer(&TypeVector::vacuum(6, 3), &TypeVector::vacuum(6, 3)).unwrap();
        let l = lift(&vac, 6).unwrap();
        assert_eq!(l.entry(&[0, 0], &[0, 0]), C64::new(1.0, 0.0));
        let x = SymTypeOperator::random_hermitian(6, 3, &mut rng).unwrap();
        let back = unlift(6, &lift(&x, 6).unwrap()).unwrap();
        assert!(back.sub(&x).unwrap().matrix().iter().all(|z| z.norm() < 1e-15));
        assert!(lift(&x, 3).is_err());
    }

    #[test]
    fn lifted_blur_relabels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = SymTypeOperator::random_hermitian(6, 2, &mut rng).unwrap();
        let direct = blur_q(0.4, &x).unwrap();
        let lifted = lifted_blur(6, 0.4, &lift(&x, 6).unwrap()).unwrap();
        for (i, t) in direct.index().types().iter().enumerate() {
            for (j, s) in direct.index().types().iter().enumerate() {
                let got = lifted.entry(&t.counts()[1..], &s.counts()[1..]);
                assert!((got - direct.matrix()[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn limit_forms_agree() {
        assert_eq!(limit_entry(&[0], &[0], &[0], &[0], 0.3), 1.0);
        let d: f64 = 0.3;
        assert!((limit_entry(&[1], &[1], &[0], &[0], d) - d / (1.0 + d)).abs() < 1e-15);
        for modes in 1..=2 {
            let cutoff = 4;
            let dim = fock_dim(modes, cutoff).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    let h = index_occupations(i, modes, cutoff);
                    let k = index_occupations(j, modes, cutoff);
                    for delta in [0.1, 0.25, 0.5] {
                        let a = limit_operator(&h, &k, delta, cutoff).unwrap();
                        let b = limit_channel(delta, &FockOperator::outer(cutoff, &h, &k).unwrap()).unwrap();
                        assert!(close(&a, &b, 1e-12), "{h:?} {k:?} {delta}");
                    }
                }
            }
        }
    }

    #[test]
    fn convergence_small() {
        let r = convergence_study(&[0], &[0], 0.3, &[10, 20], 0.05).unwrap();
        assert!(r.rows.iter().all(|r| r.error < 1e-13) && r.verdict == Verdict::Pass);
        let r = convergence_study(&[1], &[1], 0.25, &[40, 80, 160], 0.05).unwrap();
        assert!(r.strictly_decreasing, "{r:?}");
    }

    #[test]
    fn lambda_map_basics() {
        let vac = FockOperator::vacuum(1, 6).unwrap();
        let out = lambda_map(0.5, &vac, 32).unwrap();
        assert!(close(&out.output, &vac, 1e-14));
        let one = FockOperator::outer(6, &[1], &[1]).unwrap();
        let coarse = lambda_map(0.5, &one, 64).unwrap();
        let oracle = midpoint_average(0.5, &one, 4096).unwrap();
        assert!(coarse.output.sub(&oracle).unwrap().trace_norm() < 1e-4);
        // |1><1| -> mu^2 (lambda |1><1| + (1 - lambda)|0><0|), averaged
        let vac_weight: f64 = (0..4096)
            .map(|i| {
                let p = LossParams::new(0.5 * (i as f64 + 0.5) / 4096.0).unwrap();
                p.mu * p.mu * (1.0 - p.lambda)
            })
            .sum::<f64>()
            / 4096.0;
        assert!((oracle.matrix()[(0, 0)].re - vac_weight).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_pure_fock(6, &mut rng).unwrap();
        let b = random_pure_fock(6, &mut rng).unwrap();
        let lhs = lambda_map(0.4, &a.scale(0.3).add(&b.scale(0.7)).unwrap(), 16).unwrap().output;
        let rhs = lambda_map(0.4, &a, 16).unwrap().output.scale(0.3).add(&lambda_map(0.4, &b, 16).unwrap().output.scale(0.7)).unwrap();
        assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn support_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = crate::linalg::random::pure_state(5, &mut rng);
        let grid = [0.5, 1.0, 10.0, 100.0];
        let r = support_test(&psi, &DenseOperator::projector(&psi), &grid, 0.05).unwrap();
        assert!(r.values[1].abs() < 1e-12 && r.nonincreasing && r.membership == Membership::InSupport);
        let (beta, _) = coherent_state(C64::new(1.0, 0.0), 30);
        let vac = StateVector::basis(31, 0);
        let r = support_test(&vac, &DenseOperator::projector(&beta), &[1.0, 1e3, 1e6], 0.05).unwrap();
        let floor = 1.0 - (-1.0f64).exp();
        assert!(r.values.iter().all(|&v| v >= floor - 1e-9));
        assert!(matches!(r.membership, Membership::NotInSupport { .. }));
        let thermal = DenseOperator::diagonal(&[0.5, 0.25, 0.125, 0.0625, 0.0625]);
        let r = support_test(&psi, &thermal, &[1.0, 16.0, 1e3], 0.05).unwrap();
        assert!(r.values[2] < 1e-12 && r.membership == Membership::InSupport);
    }

    #[test]
    fn vacuum_support_on_one_photon() {
        let one = FockOperator::outer(12, &[1], &[1]).unwrap();
        let grid: Vec<f64> = (0..=8).map(|e| 10f64.powi(e)).collect();
        let r = vacuum_support_experiment(&one, 0.5, 32, &grid, 0.05).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let vac = FockOperator::vacuum(1, 12).unwrap();
        let r = vacuum_support_experiment(&vac, 0.5, 8, &[1.0], 0.05).unwrap();
        assert!(r.support.values[0].abs() < 1e-12);
    }

    #[test]
    fn coherent_counterexample_holds() {
        let grid: Vec<f64> = (0..=8).map(|e| 10f64.powi(e)).collect();
        let r = coherent_counterexample(2.0, 0.3, 30, &grid, 0.02).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.min_value >= 1.0 - (-r.lambda * 4.0).exp() - 0.02);
        assert_eq!(coherent_counterexample(2.0, 0.3, 8, &grid, 0.02).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn json_forms() {
        let x = FockOperator::outer(2, &[1], &[0]).unwrap();
        let back = FockOperator::from_json(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
        let pure = FockOperator::from_json(r#"{"modes":1,"cutoff":1,"amplitudes":[[0.6,0],[0,0.8]]}"#).unwrap();
        assert!((pure.trace().re - 1.0).abs() < 1e-15);
        assert!(FockOperator::from_json(r#"{"modes":1,"cutoff":2,"amplitudes":[[1,0]]}"#).is_err());
    }
}
