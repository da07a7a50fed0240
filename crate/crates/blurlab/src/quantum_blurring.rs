//! Blurring on the symmetric subspace `Sym^n(C^d)`, worked in the type basis
//! `|n,t> = C(n,nt)^{-1/2} sum_{x in T_t} |x>`.
//!
//! Operators on `Sym^n` are stored as `|T_n| x |T_n|` matrices indexed by
//! [`TypeIndex`] order. The full tensor space is only touched by
//! [`SymTypeOperator::to_tensor`], [`SymTypeOperator::from_tensor`] and
//! [`blur_rho`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::{d_max_to_hull, dtilde_max, dtilde_to_hull, rel_ent_to_hull, DivergenceResult, HullOptions};
use crate::free_sets::FreeFamily;
use crate::hypergeometric::{bosonic_entropy, pmf};
use crate::linalg::{
    self, checked_tensor_dim, index_to_digits, partial_trace, random, symmetrize, tensor, tensor_power, trace_norm,
    CMat, DenseOperator, StateVector, C64,
};
use crate::report::{Bracket, CheckRecord, Verdict};
use crate::types::{ln_factorial, TypeIndex, TypeVector};
use crate::{precondition, robust_floor, Error, Result};

/// Cached type enumeration for `(n, d)`.
pub fn type_index(n: usize, d: usize) -> Result<Arc<TypeIndex>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TypeIndex>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(ix) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(n, d)) {
        return Ok(ix.clone());
    }
    let ix = Arc::new(TypeIndex::new(n, d)?);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert((n, d), ix.clone());
    Ok(ix)
}

/// `ln C(sum c, c)` for nonnegative counts.
fn ln_mult(c: &[usize]) -> f64 {
    ln_factorial(c.iter().sum()) - c.iter().map(|&k| ln_factorial(k)).sum::<f64>()
}

fn checked_sub(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    a.iter().zip(b).map(|(&x, &y)| x.checked_sub(y)).collect()
}

fn add_vacuum(c: &[usize], r: usize) -> Vec<usize> {
    let mut v = c.to_vec();
    v[0] += r;
    v
}

/// Operator on `Sym^n(C^d)` in the type basis.
#[derive(Clone, Debug)]
pub struct SymTypeOperator {
    n: usize,
    d: usize,
    index: Arc<TypeIndex>,
    mat: CMat,
}

impl SymTypeOperator {
    pub fn new(n: usize, d: usize, mat: CMat) -> Result<Self> {
        if d == 0 {
            return precondition("local dimension must be positive");
        }
        let index = type_index(n, d)?;
        if mat.nrows() != index.len() || mat.ncols() != index.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {} types",
                mat.nrows(),
                mat.ncols(),
                index.len()
            )));
        }
        Ok(Self { n, d, index, mat })
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        let len = type_index(n, d)?.len();
        Self::new(n, d, CMat::zeros(len, len))
    }

    /// `|n,t><n,s|`.
    pub fn outer(t: &TypeVector, s: &TypeVector) -> Result<Self> {
        if t.n() != s.n() || t.alphabet() != s.alphabet() {
            return Err(Error::DimensionMismatch("types of different shape".into()));
        }
        let mut x = Self::zeros(t.n(), t.alphabet())?;
        let i = x.index.position(t.counts()).expect("enumerated");
        let j = x.index.position(s.counts()).expect("enumerated");
        x.mat[(i, j)] = C64::new(1.0, 0.0);
        Ok(x)
    }

    /// Random Hermitian operator with unit Frobenius norm.
    pub fn random_hermitian<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Self> {
        let len = type_index(n, d)?.len();
        Self::new(n, d, random::hermitian(len, rng).into_matrix())
    }

    /// Random density operator (Hilbert–Schmidt measure) on `Sym^n`.
    pub fn random_state<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Self> {
        let len = type_index(n, d)?.len();
        Self::new(n, d, random::density(len, rng).into_matrix())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn index(&self) -> &TypeIndex {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn entry(&self, t: &TypeVector, s: &TypeVector) -> C64 {
        match (self.index.position(t.counts()), self.index.position(s.counts())) {
            (Some(i), Some(j)) => self.mat[(i, j)],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.mat - self.mat.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// The type-basis matrix as a plain operator.
    pub fn as_dense(&self) -> DenseOperator {
        DenseOperator::from_mat(self.mat.clone())
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.as_dense())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { mat: &self.mat * C64::new(a, 0.0), ..self.clone() }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(Self { mat: &self.mat + &o.mat, ..self.clone() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(Self { mat: &self.mat - &o.mat, ..self.clone() })
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.n != o.n || self.d != o.d {
            return Err(Error::DimensionMismatch(format!("(n,d)=({},{}) vs ({},{})", self.n, self.d, o.n, o.d)));
        }
        Ok(())
    }

    /// `sum_{t,s} X[t,s] |n,t><n,s|` on `(C^d)^{⊗n}`.
    pub fn to_tensor(&self) -> Result<DenseOperator> {
        let v = sym_isometry(self.n, self.d)?;
        Ok(DenseOperator::from_mat(&v * &self.mat * v.adjoint()))
    }

    /// Compression `<n,t| Y |n,s>` of a tensor-space operator.
    pub fn from_tensor(n: usize, d: usize, y: &DenseOperator) -> Result<Self> {
        let v = sym_isometry(n, d)?;
        if y.dim() != v.nrows() {
            return Err(Error::DimensionMismatch(format!("operator dimension {} vs {d}^{n}", y.dim())));
        }
        Self::new(n, d, v.adjoint() * y.matrix() * &v)
    }
}

/// Isometry `Sym^n -> (C^d)^{⊗n}` whose columns are the type-basis vectors.
pub fn sym_isometry(n: usize, d: usize) -> Result<CMat> {
    let dim = checked_tensor_dim(d, n)?;
    let ix = type_index(n, d)?;
    let norms: Vec<f64> = ix.types().iter().map(|t| (-0.5 * ln_mult(t.counts())).exp()).collect();
    let mut v = CMat::zeros(dim, ix.len());
    let mut digits = vec![0; n];
    let mut counts = vec![0; d];
    for i in 0..dim {
        index_to_digits(i, d, &mut digits);
        counts.iter_mut().for_each(|c| *c = 0);
        digits.iter().for_each(|&x| counts[x] += 1);
        let j = ix.position(&counts).expect("every sequence has a type");
        v[(i, j)] = C64::new(norms[j], 0.0);
    }
    Ok(v)
}

/// `|n,t>` as a vector in `(C^d)^{⊗n}`.
pub fn sym_basis_vector(n: usize, t: &TypeVector, d: usize) -> Result<StateVector> {
    if t.n() != n || t.alphabet() != d {
        return Err(Error::DimensionMismatch(format!("type of shape ({},{}) vs ({n},{d})", t.n(), t.alphabet())));
    }
    let v = sym_isometry(n, d)?;
    let j = type_index(n, d)?.position(t.counts()).expect("enumerated");
    Ok(StateVector::new(v.column(j).into_owned()))
}

/// Partial overlap `<x^r| n,t>`, where `x^r` is any sequence of type `w`.
///
/// Returns the coefficient and the residual type on `n - r` sites, or
/// `(0, None)` when `nt` does not dominate `rw`.
pub fn sym_overlap(r: usize, w: &TypeVector, n: usize, t: &TypeVector) -> Result<(f64, Option<TypeVector>)> {
    if r > n {
        return precondition(format!("cannot contract {r} of {n} sites"));
    }
    if w.n() != r || t.n() != n || w.alphabet() != t.alphabet() {
        return Err(Error::DimensionMismatch("type shapes do not match (r, n, alphabet)".into()));
    }
    match checked_sub(t.counts(), w.counts()) {
        None => Ok((0.0, None)),
        Some(rest) => {
            let coef = (0.5 * (ln_mult(&rest) - ln_mult(t.counts()))).exp();
            Ok((coef, Some(TypeVector::new(rest))))
        }
    }
}

/// For each source type and each `w in T_r`, the position of `nt - rw` in
/// `T_{n-r}` if it exists.
fn residual_table(src: &TypeIndex, wr: &TypeIndex, dst: &TypeIndex) -> Vec<Vec<Option<usize>>> {
    src.types()
        .iter()
        .map(|t| {
            wr.types()
                .iter()
                .map(|w| checked_sub(t.counts(), w.counts()).and_then(|c| dst.position(&c)))
                .collect()
        })
        .collect()
}

/// `Tr_r X` on `Sym^{n-r}` via the closed form for `Tr_r |n,t><n,s|`.
pub fn sym_partial_trace(r: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let (n, d) = (x.n, x.d);
    if r > n {
        return precondition(format!("cannot trace {r} of {n} sites"));
    }
    let src = &x.index;
    let wr = type_index(r, d)?;
    let dst = type_index(n - r, d)?;
    let table = residual_table(src, &wr, &dst);
    let ln_src: Vec<f64> = src.types().iter().map(|t| ln_mult(t.counts())).collect();
    let ln_dst: Vec<f64> = dst.types().iter().map(|t| ln_mult(t.counts())).collect();
    let ln_w: Vec<f64> = wr.types().iter().map(|w| ln_mult(w.counts())).collect();
    let mut out = CMat::zeros(dst.len(), dst.len());
    for i in 0..src.len() {
        for j in 0..src.len() {
            let v = x.mat[(i, j)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for (k, lw) in ln_w.iter().enumerate() {
                if let (Some(a), Some(b)) = (table[i][k], table[j][k]) {
                    let c = (lw + 0.5 * (ln_dst[a] + ln_dst[b] - ln_src[i] - ln_src[j])).exp();
                    out[(a, b)] += v * c;
                }
            }
        }
    }
    SymTypeOperator::new(n - r, d, out)
}

/// `Gamma_{n,r}(X) = Pi_n (|0><0|^{⊗r} ⊗ Tr_r X) Pi_n`.
pub fn gamma(r: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let y = sym_partial_trace(r, x)?;
    let (n, d) = (x.n, x.d);
    let dst = type_index(n - r, d)?;
    // <n, u + r e0 | (|0^r> ⊗ |n-r, u>) = sqrt(C(n-r, u) / C(n, u + r e0))
    let lift: Vec<(usize, f64)> = dst
        .types()
        .iter()
        .map(|u| {
            let up = add_vacuum(u.counts(), r);
            let pos = x.index.position(&up).expect("padding a type keeps it valid");
            (pos, (0.5 * (ln_mult(u.counts()) - ln_mult(&up))).exp())
        })
        .collect();
    let mut out = CMat::zeros(x.dim(), x.dim());
    for (a, &(pa, ca)) in lift.iter().enumerate() {
        for (b, &(pb, cb)) in lift.iter().enumerate() {
            out[(pa, pb)] = y.mat[(a, b)] * (ca * cb);
        }
    }
    SymTypeOperator::new(n, d, out)
}

/// A type-basis operator with at most one nonzero per column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausOperator {
    pub w: TypeVector,
    /// `(row, column, coefficient)`.
    pub entries: Vec<(usize, usize, f64)>,
}

/// Kraus operators of `Gamma_{n,r}` (or of `Theta_{n,r}`), one per `w in T_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausFamily {
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub dim: usize,
    pub operators: Vec<KrausOperator>,
}

impl KrausOperator {
    pub fn to_matrix(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        for &(i, j, c) in &self.entries {
            m[(i, j)] += c;
        }
        m
    }
}

impl KrausFamily {
    /// `sum_w M X M^dagger`.
    pub fn apply(&self, x: &SymTypeOperator) -> Result<SymTypeOperator> {
        if x.n != self.n || x.d != self.d {
            return Err(Error::DimensionMismatch("Kraus family and operator differ in (n, d)".into()));
        }
        let out = self
            .operators
            .par_iter()
            .map(|op| {
                let mut acc = CMat::zeros(self.dim, self.dim);
                for &(a, t, ca) in &op.entries {
                    for &(b, s, cb) in &op.entries {
                        acc[(a, b)] += x.mat[(t, s)] * (ca * cb);
                    }
                }
                acc
            })
            .reduce(|| CMat::zeros(self.dim, self.dim), |a, b| a + b);
        SymTypeOperator::new(self.n, self.d, out)
    }

    /// `sum_w M^dagger M`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dim, self.dim);
        for op in &self.operators {
            let m = op.to_matrix(self.dim);
            g += m.transpose() * m;
        }
        g
    }
}

/// Log of the Kraus coefficient taking `|n,t>` to `|n, t - (r/n)w + (r/n)e0>`,
/// with the destination counts, or `None` when it vanishes.
fn ln_kraus_coef(t: &[usize], w: &[usize], r: usize) -> Option<(f64, Vec<usize>)> {
    let rest = checked_sub(t, w)?;
    let dest = add_vacuum(&rest, r);
    let ln = 0.5 * (2.0 * ln_mult(&rest) + ln_mult(w) - ln_mult(&dest) - ln_mult(t));
    Some((ln, dest))
}

fn ln_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

fn kraus_family_scaled(n: usize, r: usize, d: usize, ln_scale: Option<&[f64]>) -> Result<KrausFamily> {
    if r > n {
        return precondition(format!("r = {r} exceeds n = {n}"));
    }
    let src = type_index(n, d)?;
    let wr = type_index(r, d)?;
    let operators = wr
        .types()
        .par_iter()
        .map(|w| {
            let entries = src
                .types()
                .iter()
                .enumerate()
                .filter_map(|(j, t)| {
                    let (ln, dest) = ln_kraus_coef(t.counts(), w.counts(), r)?;
                    let shift = ln_scale.map_or(0.0, |s| s[j]);
                    Some((src.position(&dest).expect("valid type"), j, (ln + shift).exp()))
                })
                .collect();
            KrausOperator { w: w.clone(), entries }
        })
        .collect();
    Ok(KrausFamily { n, r, d, dim: src.len(), operators })
}

/// Kraus operators `M_{r,w}` of `Gamma_{n,r}`.
pub fn kraus_family(n: usize, r: usize, d: usize) -> Result<KrausFamily> {
    kraus_family_scaled(n, r, d, None)
}

/// `ln d_r(t)` for every `t in T_n`.
pub fn ln_d_r_diag(n: usize, r: usize, d: usize) -> Result<Vec<f64>> {
    if r > n {
        return precondition(format!("r = {r} exceeds n = {n}"));
    }
    let src = type_index(n, d)?;
    let wr = type_index(r, d)?;
    Ok(src
        .types()
        .iter()
        .map(|t| ln_sum_exp(wr.types().iter().filter_map(|w| ln_kraus_coef(t.counts(), w.counts(), r)).map(|(l, _)| 2.0 * l)))
        .collect())
}

/// Diagonal of `D_r = sum_w M^dagger M` in type-basis order.
pub fn d_r_diag(n: usize, r: usize, d: usize) -> Result<Vec<f64>> {
    Ok(ln_d_r_diag(n, r, d)?.into_iter().map(f64::exp).collect())
}

/// Kraus operators `N = M D_r^{-1/2}` of the channel `Theta_{n,r}`.
pub fn theta_family(n: usize, r: usize, d: usize) -> Result<KrausFamily> {
    let ln_d = ln_d_r_diag(n, r, d)?;
    if let Some(bad) = ln_d.iter().find(|&&l| l < (1e-300f64).ln()) {
        return Err(Error::Numerical(format!("d_r entry exp({bad}) below 1e-300")));
    }
    let scale: Vec<f64> = ln_d.iter().map(|l| -0.5 * l).collect();
    kraus_family_scaled(n, r, d, Some(&scale))
}

/// `Theta_{n,r}(X)`.
pub fn theta(r: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    theta_family(x.n, r, x.d)?.apply(x)
}

/// `D_r^{1/2} X D_r^{1/2}`.
pub fn d_r_sandwich(r: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let s: Vec<f64> = d_r_diag(x.n, r, x.d)?.into_iter().map(f64::sqrt).collect();
    let mut out = x.mat.clone();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] *= s[i] * s[j];
        }
    }
    SymTypeOperator::new(x.n, x.d, out)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.5) {
        return precondition(format!("delta must be in (0, 1/2], got {delta}"));
    }
    Ok(())
}

/// Number of appended sites `floor(delta n)`.
pub fn appended_sites(n: usize, delta: f64) -> usize {
    robust_floor(delta * n as f64)
}

/// `H(n+m, m; n, r)` for `r = 0..=m`.
pub fn blur_weights(n: usize, m: usize) -> Result<Vec<f64>> {
    (0..=m.min(n)).map(|r| pmf(n + m, m, n, r)).collect()
}

/// Blurring with `m` appended vacuum sites: `sum_r H(n+m, m; n, r) Gamma_{n,r}(X)`.
pub fn blur_q_sites(m: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let w = blur_weights(x.n, m)?;
    let parts: Result<Vec<CMat>> =
        w.par_iter().enumerate().map(|(r, &h)| Ok(gamma(r, x)?.mat * C64::new(h, 0.0))).collect();
    let sum = parts?.into_iter().fold(CMat::zeros(x.dim(), x.dim()), |a, b| a + b);
    SymTypeOperator::new(x.n, x.d, sum)
}

/// The symmetric-subspace blurring map `B_{n,delta}`.
pub fn blur_q(delta: f64, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    check_delta(delta)?;
    blur_q_sites(appended_sites(x.n, delta), x)
}

/// `Tr_m S_{n+m}(X ⊗ rho^{⊗m})` for explicit `m`.
pub fn blur_rho_sites(n: usize, m: usize, rho: &DenseOperator, x: &DenseOperator) -> Result<DenseOperator> {
    let d = rho.dim();
    if checked_tensor_dim(d, n)? != x.dim() {
        return Err(Error::DimensionMismatch(format!("operator dimension {} vs {d}^{n}", x.dim())));
    }
    checked_tensor_dim(d, n + m)?;
    if m == 0 {
        return symmetrize(x, d, n);
    }
    let big = tensor(x, &tensor_power(rho, m)?);
    let sym = symmetrize(&big, d, n + m)?;
    partial_trace(&sym, &vec![d; n + m], &(n..n + m).collect::<Vec<_>>())
}

/// The state-dependent blurring map `Bbar^rho_{n,delta}`.
pub fn blur_rho(n: usize, delta: f64, rho: &DenseOperator, x: &DenseOperator) -> Result<DenseOperator> {
    check_delta(delta)?;
    blur_rho_sites(n, appended_sites(n, delta), rho, x)
}

/// Weights of the exact average over `delta in (0, big_delta]`: the fraction
/// of the interval on which `floor(delta n) = m`.
pub fn delta_average_weights(n: usize, big_delta: f64) -> Result<Vec<(usize, f64)>> {
    check_delta(big_delta)?;
    let top = appended_sites(n, big_delta);
    Ok((0..=top)
        .filter_map(|m| {
            let lo = m as f64 / n as f64;
            let hi = ((m + 1) as f64 / n as f64).min(big_delta);
            (hi > lo).then(|| (m, (hi - lo) / big_delta))
        })
        .collect())
}

/// Midpoint-rule average of `B_{n,delta}` over `delta in (0, big_delta]` with
/// `nodes` nodes.
pub fn blur_q_averaged(big_delta: f64, nodes: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    check_delta(big_delta)?;
    if nodes == 0 {
        return precondition("quadrature needs at least one node");
    }
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for k in 0..nodes {
        let delta = big_delta * (k as f64 + 0.5) / nodes as f64;
        *counts.entry(appended_sites(x.n, delta)).or_default() += 1;
    }
    let mut acc = SymTypeOperator::zeros(x.n, x.d)?;
    for (m, c) in counts {
        acc = acc.add(&blur_q_sites(m, x)?.scale(c as f64 / nodes as f64))?;
    }
    Ok(acc)
}

/// Exact average of `B_{n,delta}` over `delta in (0, big_delta]`.
pub fn blur_q_averaged_exact(big_delta: f64, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let mut acc = SymTypeOperator::zeros(x.n, x.d)?;
    for (m, w) in delta_average_weights(x.n, big_delta)? {
        acc = acc.add(&blur_q_sites(m, x)?.scale(w))?;
    }
    Ok(acc)
}

/// Outcome of a norm inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    /// `||(1 - P_V) T||` for the tail-filtering lemma.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub detail: String,
}

impl NormCheck {
    fn decide(lhs: f64, rhs: f64, mu: Option<f64>, detail: impl Into<String>) -> Self {
        let tol = 1e-10 * (1.0 + rhs.abs());
        let verdict = if lhs <= rhs + tol { Verdict::Pass } else { Verdict::Fail };
        Self { verdict, lhs, rhs, slack: rhs - lhs, mu, detail: detail.into() }
    }

    fn inapplicable(detail: impl Into<String>) -> Self {
        Self { verdict: Verdict::Inapplicable, lhs: f64::NAN, rhs: f64::NAN, slack: f64::NAN, mu: None, detail: detail.into() }
    }
}

/// Checks `||T Z T||_1 <= (1 - (1 - mu)^2) ||Z||_1` with `mu = ||(1 - P_V) T||`.
///
/// Requires `T` Hermitian with `||T|| = 1`, `T V ⊆ V` and `P_V Z P_V = 0`;
/// otherwise the report is inapplicable.
pub fn check_tail_filtering(t: &DenseOperator, v_basis: &[StateVector], z: &DenseOperator) -> Result<NormCheck> {
    let dim = t.dim();
    if z.dim() != dim || v_basis.iter().any(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch("T, Z and V must share a dimension".into()));
    }
    if !t.is_hermitian(1e-10) {
        return Ok(NormCheck::inapplicable("T is not Hermitian"));
    }
    let tn = linalg::operator_norm(t);
    if (tn - 1.0).abs() > 1e-9 {
        return Ok(NormCheck::inapplicable(format!("||T|| = {tn}, expected 1")));
    }
    let p = subspace_projector(dim, v_basis);
    let id = CMat::identity(dim, dim);
    let q = &id - &p;
    let leak = (&q * t.matrix() * &p).iter().map(|x| x.norm()).fold(0.0, f64::max);
    if leak > 1e-9 {
        return Ok(NormCheck::inapplicable(format!("T does not leave V invariant (leak {leak:.3e})")));
    }
    let zn = trace_norm(z);
    let inner = (&p * z.matrix() * &p).iter().map(|x| x.norm()).fold(0.0, f64::max);
    if inner > 1e-9 * zn.max(1.0) {
        return Ok(NormCheck::inapplicable(format!("P_V Z P_V != 0 (max entry {inner:.3e})")));
    }
    let mu = linalg::operator_norm(&DenseOperator::from_mat(&q * t.matrix()));
    let lhs = trace_norm(&z.conjugate_by(t.matrix()));
    let rhs = (1.0 - (1.0 - mu).powi(2)) * zn;
    Ok(NormCheck::decide(lhs, rhs, Some(mu), format!("dim {dim}, dim V {}", v_basis.len())))
}

/// Orthogonal projector onto the span of `basis` (Gram–Schmidt via QR).
fn subspace_projector(dim: usize, basis: &[StateVector]) -> CMat {
    if basis.is_empty() {
        return CMat::zeros(dim, dim);
    }
    let a = CMat::from_columns(&basis.iter().map(|v| v.amplitudes().clone()).collect::<Vec<_>>());
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    let keep: Vec<usize> = (0..r.nrows().min(r.ncols())).filter(|&i| r[(i, i)].norm() > 1e-10).collect();
    let mut p = CMat::zeros(dim, dim);
    for i in keep {
        let c = q.column(i);
        p += &c * c.adjoint();
    }
    p
}

/// Random admissible triple for the tail-filtering lemma on `C^dim`.
pub fn random_tail_instance<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> (DenseOperator, Vec<StateVector>, DenseOperator) {
    let k = rng.gen_range(1..dim.max(2));
    let u = random::unitary(dim, rng);
    let mut block = CMat::zeros(dim, dim);
    let a = random::hermitian(k, rng).into_matrix();
    let b = random::hermitian(dim - k, rng).into_matrix();
    block.view_mut((0, 0), (k, k)).copy_from(&a);
    block.view_mut((k, k), (dim - k, dim - k)).copy_from(&b);
    let t = &u * block * u.adjoint();
    let t = DenseOperator::from_mat(&t / C64::new(linalg::operator_norm(&DenseOperator::from_mat(t.clone())), 0.0));
    let basis: Vec<StateVector> = (0..k).map(|i| StateVector::new(u.column(i).into_owned())).collect();
    let p = subspace_projector(dim, &basis);
    let z0 = random::hermitian(dim, rng).into_matrix();
    let z = &z0 - &p * &z0 * &p;
    (t, basis, DenseOperator::from_mat(z))
}

/// `max_{x != 0} n t(x) <= occupation`.
fn is_low(t: &TypeVector, occupation: usize) -> bool {
    t.counts()[1..].iter().all(|&c| c <= occupation)
}

/// Zeroes the low-occupation block of `x` in place.
pub fn clear_low_block(x: &mut SymTypeOperator, occupation: usize) {
    let low: Vec<bool> = x.index.types().iter().map(|t| is_low(t, occupation)).collect();
    for i in 0..low.len() {
        for j in 0..low.len() {
            if low[i] && low[j] {
                x.mat[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
}

/// Right-hand side factor `2(e^{-n delta/18} + sqrt(3) e^{-N delta^2/16})`.
pub fn output_norm_factor(n: usize, occupation: usize, delta: f64) -> f64 {
    2.0 * ((-(n as f64) * delta / 18.0).exp() + 3f64.sqrt() * (-(occupation as f64) * delta * delta / 16.0).exp())
}

/// Checks `||B_{n,delta}(X)||_1 <= 2(e^{-n delta/18} + sqrt(3) e^{-N delta^2/16}) ||X||_1`
/// for `X` vanishing on the block `max_{x != 0} nt(x) <= N`.
pub fn check_output_norm(occupation: usize, delta: f64, x: &SymTypeOperator) -> Result<NormCheck> {
    check_delta(delta)?;
    let scale = x.mat.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let low: Vec<bool> = x.index.types().iter().map(|t| is_low(t, occupation)).collect();
    for i in 0..low.len() {
        for j in 0..low.len() {
            if low[i] && low[j] && x.mat[(i, j)].norm() > 1e-12 * scale.max(1e-300) {
                return Ok(NormCheck::inapplicable("X does not vanish on the low-occupation block"));
            }
        }
    }
    let lhs = blur_q(delta, x)?.trace_norm();
    let rhs = output_norm_factor(x.n, occupation, delta) * x.trace_norm();
    Ok(NormCheck::decide(lhs, rhs, None, format!("n {}, N {occupation}, delta {delta}", x.n)))
}

/// Largest `d_r(t)` over types with `max_{x != 0} nt(x) >= N`, against
/// `3 e^{-N eta^2/2}` at the largest admissible `eta = min(r/n, 1 - r/n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrBoundCheck {
    pub n: usize,
    pub r: usize,
    pub occupation: usize,
    pub eta: f64,
    pub max_d_r: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

pub fn check_d_r_bound(n: usize, r: usize, d: usize, occupation: usize) -> Result<DrBoundCheck> {
    let ix = type_index(n, d)?;
    let dr = d_r_diag(n, r, d)?;
    let eta = if n == 0 { 0.0 } else { (r as f64 / n as f64).min(1.0 - r as f64 / n as f64) };
    let bound = 3.0 * (-(occupation as f64) * eta * eta / 2.0).exp();
    let max_d_r = ix
        .types()
        .iter()
        .zip(&dr)
        .filter(|(t, _)| t.counts()[1..].iter().any(|&c| c >= occupation))
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let verdict = if max_d_r <= bound * (1.0 + 1e-12) { Verdict::Pass } else { Verdict::Fail };
    Ok(DrBoundCheck { n, r, occupation, eta, max_d_r, bound, verdict })
}

/// Settings for [`check_gqsl_chain`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    /// Smoothing parameter of `Dtilde_max`.
    pub eta: f64,
    /// Weight of the random admixture in the constructed `rho_n`.
    pub perturbation: f64,
    pub seed: u64,
    pub hull: HullOptions,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { eta: 0.1, perturbation: 0.1, seed: 7, hull: HullOptions::default() }
    }
}

/// Per-step records of the inequality chain at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub records: Vec<CheckRecord>,
}

impl ChainReport {
    pub fn verdict(&self) -> Verdict {
        self.records.iter().fold(Verdict::Inapplicable, |a, r| a.combine(r.verdict))
    }
}

fn bracket_of(r: &DivergenceResult) -> Bracket {
    if r.infinite {
        Bracket::exact(f64::INFINITY)
    } else {
        r.bracket()
    }
}

/// `S_n((1 - eps) rho^{⊗n} + eps tau)` for a random state `tau`.
pub fn perturbed_power(rho: &DenseOperator, n: usize, eps: f64, seed: u64) -> Result<DenseOperator> {
    use rand::SeedableRng;
    let d = rho.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let tau = random::density(checked_tensor_dim(d, n)?, &mut rng);
    let mix = tensor_power(rho, n)?.scale(1.0 - eps).add(&tau.scale(eps))?;
    symmetrize(&mix, d, n)
}

/// Per-`n` checks of the inequality chain behind the generalised quantum
/// Stein lemma:
///
/// - `Bbar^rho(rho_n)` costs at most `m log(1/c)` of `D_max` to the free set,
///   through the append and free-operation steps;
/// - the budget form `D_max <= n(lambda + delta log(1/c))` when
///   `D_max(rho_n || F_n) <= n lambda`;
/// - the triangle inequality for `Dtilde_max^eta`;
/// - asymptotic continuity of the relative entropy to `F_n`;
/// - the universal bound `D_max(rho_n || F_n) <= n log(1/c)`.
///
/// `rho_n` defaults to [`perturbed_power`].
pub fn check_gqsl_chain(
    rho: &DenseOperator,
    rho_n: Option<&DenseOperator>,
    family: &FreeFamily,
    n: usize,
    delta: f64,
    lambda_budget: Option<f64>,
    opts: &ChainOptions,
) -> Result<ChainReport> {
    check_delta(delta)?;
    rho.validate_state()?;
    let d = rho.dim();
    if family.dim() != d {
        return Err(Error::DimensionMismatch(format!("family dimension {} vs state dimension {d}", family.dim())));
    }
    let m = appended_sites(n, delta);
    let c = family.c();
    let log_c = (1.0 / c).log2();
    let constructed;
    let rho_n = match rho_n {
        Some(r) => r,
        None => {
            constructed = perturbed_power(rho, n, opts.perturbation, opts.seed)?;
            &constructed
        }
    };
    rho_n.validate_state()?;
    let gens_n = family.level(n)?;
    let gens_nm = family.level(n + m)?;
    let h = &opts.hull;
    let tol = 1e-7;

    let base = bracket_of(&d_max_to_hull(rho_n, gens_n, h)?);
    let appended = tensor(rho_n, &tensor_power(rho, m)?);
    let appended_dmax = bracket_of(&d_max_to_hull(&appended, gens_nm, h)?);
    let blurred = blur_rho_sites(n, m, rho, rho_n)?;
    let blurred_dmax = bracket_of(&d_max_to_hull(&blurred, gens_n, h)?);
    let extra = m as f64 * log_c;

    let mut records = vec![
        CheckRecord::bracketed(
            "append",
            appended_dmax,
            base.shift(extra),
            tol,
            format!("D_max(rho_n ⊗ rho^⊗{m} || F_{}) <= D_max(rho_n || F_{n}) + {m} log(1/c)", n + m),
        ),
        CheckRecord::bracketed(
            "free-operation",
            blurred_dmax,
            appended_dmax,
            tol,
            "twirl and partial trace do not increase D_max to the free set",
        ),
        CheckRecord::bracketed(
            "blurring",
            blurred_dmax,
            base.shift(extra),
            tol,
            format!("D_max(Bbar(rho_n) || F_{n}) <= D_max(rho_n || F_{n}) + {m} log(1/c)"),
        ),
        CheckRecord::bracketed(
            "universal-bound",
            base,
            Bracket::exact(n as f64 * log_c),
            tol,
            format!("D_max(rho_n || F_{n}) <= {n} log(1/c)"),
        ),
    ];

    if let Some(lambda) = lambda_budget {
        let premise = base.hi <= n as f64 * lambda + tol;
        let mut rec = CheckRecord::bracketed(
            "budget",
            blurred_dmax,
            Bracket::exact(n as f64 * (lambda + delta * log_c)),
            tol,
            format!("D_max(Bbar(rho_n) || F_{n}) <= n (lambda + delta log(1/c)), lambda = {lambda}"),
        );
        if !premise {
            rec.verdict = Verdict::Inapplicable;
            rec.detail = format!("premise D_max(rho_n || F_{n}) <= n lambda fails (lambda = {lambda})");
        }
        records.push(rec);
    }

    let target = tensor_power(rho, n)?;
    let through = bracket_of(&dtilde_max(&target, &blurred, opts.eta)?);
    let direct = bracket_of(&dtilde_to_hull(&target, gens_n, opts.eta, h)?);
    records.push(CheckRecord::bracketed(
        "dtilde-triangle",
        direct,
        through.add(blurred_dmax),
        tol,
        format!("Dtilde^{}(rho^⊗n || F) <= Dtilde(rho^⊗n || omega) + D_max(omega || F)", opts.eta),
    ));

    let a = bracket_of(&rel_ent_to_hull(&target, gens_n, h)?);
    let b = bracket_of(&rel_ent_to_hull(rho_n, gens_n, h)?);
    let eps = 0.5 * trace_norm(&target.sub(rho_n)?);
    let diff = Bracket::new((a.lo - b.hi).max(b.lo - a.hi).max(0.0), (a.hi - b.lo).max(b.hi - a.lo));
    let cont = eps * n as f64 * log_c + bosonic_entropy(eps);
    records.push(CheckRecord::bracketed(
        "asymptotic-continuity",
        diff,
        Bracket::exact(cont),
        tol,
        format!("|D(rho^⊗n || F) - D(rho_n || F)| <= eps n log(1/c) + g(eps), eps = {eps:.6}"),
    ));

    Ok(ChainReport { n, m, c, records })
}

/// Finite-`n` proxy for the asymptotic blurring lemma at `rho = |0><0|`:
/// `Tr(rho^{⊗n} - M avg_delta B_{n,delta}(rho_n))_+` for each multiplier,
/// with `rho_n = (1 - eps)|n,e0><n,e0| + eps |n,e1><n,e1|` on `C^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurringProxy {
    pub n: usize,
    pub multipliers: Vec<f64>,
    pub values: Vec<f64>,
    /// Trace-norm distance between the `K`- and `2K`-node averages.
    pub richardson_gap: f64,
    /// Trace-norm distance between the `K`-node average and the exact average.
    pub quadrature_error: f64,
}

impl BlurringProxy {
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    }
}

pub fn blurring_proxy(n: usize, eps: f64, big_delta: f64, nodes: usize, multipliers: &[f64]) -> Result<BlurringProxy> {
    if !(0.0..=1.0).contains(&eps) {
        return precondition("perturbation weight must lie in [0, 1]");
    }
    if n == 0 {
        return precondition("n must be positive");
    }
    let vac = TypeVector::vacuum(n, 2);
    let mut ones = vec![0; 2];
    ones[1] = n;
    let ones = TypeVector::new(ones);
    let target = SymTypeOperator::outer(&vac, &vac)?;
    let rho_n = target.scale(1.0 - eps).add(&SymTypeOperator::outer(&ones, &ones)?.scale(eps))?;
    let avg = blur_q_averaged(big_delta, nodes, &rho_n)?;
    let avg2 = blur_q_averaged(big_delta, 2 * nodes, &rho_n)?;
    let exact = blur_q_averaged_exact(big_delta, &rho_n)?;
    let values = multipliers
        .iter()
        .map(|&mult| linalg::trace_positive_part(&target.sub(&avg.scale(mult))?.as_dense()))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlurringProxy {
        n,
        multipliers: multipliers.to_vec(),
        values,
        richardson_gap: avg.sub(&avg2)?.trace_norm(),
        quadrature_error: avg.sub(&exact)?.trace_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tv(c: &[usize]) -> TypeVector {
        TypeVector::new(c.to_vec())
    }

    fn dist(a: &SymTypeOperator, b: &SymTypeOperator) -> f64 {
        a.sub(b).unwrap().trace_norm()
    }

    #[test]
    fn basis_vectors() {
        let v = sym_basis_vector(2, &tv(&[1, 1]), 2).unwrap();
        let h = 0.5f64.sqrt();
        let want = [0.0, h, h, 0.0];
        for (a, b) in v.amplitudes().iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        assert!((sym_basis_vector(3, &tv(&[3, 0]), 2).unwrap().amplitudes()[0].re - 1.0).abs() < 1e-15);
        let iso = sym_isometry(3, 2).unwrap();
        let gram = iso.adjoint() * &iso;
        assert!((gram - CMat::identity(4, 4)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn overlaps() {
        let (c, rest) = sym_overlap(0, &tv(&[0, 0]), 3, &tv(&[2, 1])).unwrap();
        assert!((c - 1.0).abs() < 1e-15 && rest.unwrap().counts() == [2, 1]);
        let (c, rest) = sym_overlap(1, &tv(&[1, 0]), 2, &tv(&[1, 1])).unwrap();
        assert!((c - 0.5f64.sqrt()).abs() < 1e-15 && rest.unwrap().counts() == [0, 1]);
        let (c, _) = sym_overlap(3, &tv(&[2, 1]), 3, &tv(&[2, 1])).unwrap();
        assert!((c - 3f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(sym_overlap(2, &tv(&[0, 2]), 3, &tv(&[2, 1])).unwrap().0, 0.0);
    }

    #[test]
    fn overlap_matches_contraction() {
        // <x^r| ⊗ 1 applied to |n,t>, with x^r = first r digits.
        for n in 1..=5 {
            for t in type_index(n, 2).unwrap().types() {
                let v = sym_basis_vector(n, t, 2).unwrap();
                for r in 0..=n {
                    for prefix in 0..(1usize << r) {
                        let digits: Vec<usize> = (0..r).map(|i| (prefix >> (r - 1 - i)) & 1).collect();
                        let w = crate::types::type_of_sequence(&digits, 2).unwrap();
                        let (c, rest) = sym_overlap(r, &w, n, t).unwrap();
                        let tail = 1usize << (n - r);
                        let got: Vec<C64> = (0..tail).map(|j| v.amplitudes()[prefix * tail + j]).collect();
                        let want: Vec<f64> = match rest {
                            None => vec![0.0; tail],
                            Some(u) => sym_basis_vector(n - r, &u, 2).unwrap().amplitudes().iter().map(|a| a.re * c).collect(),
                        };
                        for (g, w) in got.iter().zip(want) {
                            assert!((g.re - w).abs() < 1e-14 && g.im.abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let x = SymTypeOperator::outer(&tv(&[1, 1]), &tv(&[1, 1])).unwrap();
        let y = sym_partial_trace(1, &x).unwrap();
        assert!((y.matrix()[(0, 0)].re - 0.5).abs() < 1e-15 && (y.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(y.matrix()[(0, 1)].norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = SymTypeOperator::random_hermitian(4, 3, &mut rng).unwrap();
        assert!(dist(&sym_partial_trace(0, &x).unwrap(), &x) < 1e-14);
        for r in 0..=4 {
            assert!((sym_partial_trace(r, &x).unwrap().trace() - x.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=5 {
            let x = SymTypeOperator::random_hermitian(n, 2, &mut rng).unwrap();
            let full = x.to_tensor().unwrap();
            for r in 0..=n {
                let y = sym_partial_trace(r, &x).unwrap().to_tensor().unwrap();
                let want = partial_trace(&full, &vec![2; n], &(0..r).collect::<Vec<_>>()).unwrap();
                assert!(y.sub(&want).unwrap().max_abs() < 1e-12, "n {n} r {r}");
            }
        }
    }

    #[test]
    fn gamma_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = SymTypeOperator::random_hermitian(4, 2, &mut rng).unwrap();
        assert!(dist(&gamma(0, &x).unwrap(), &x) < 1e-14);
        let vac = SymTypeOperator::outer(&TypeVector::vacuum(5, 3), &TypeVector::vacuum(5, 3)).unwrap();
        for r in 0..=5 {
            assert!(dist(&gamma(r, &vac).unwrap(), &vac) < 1e-14);
        }
        // tensor-space evaluation of the defining formula at n = 3, r = 1
        let x = SymTypeOperator::random_hermitian(3, 2, &mut rng).unwrap();
        let reduced = partial_trace(&x.to_tensor().unwrap(), &[2, 2, 2], &[0]).unwrap();
        let zero = DenseOperator::projector(&StateVector::basis(2, 0));
        let want = SymTypeOperator::from_tensor(3, 2, &tensor(&zero, &reduced)).unwrap();
        assert!(dist(&gamma(1, &x).unwrap(), &want) < 1e-12);
    }

    #[test]
    fn kraus_matches_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fam = kraus_family(4, 2, 2).unwrap();
        for _ in 0..50 {
            let x = SymTypeOperator::random_hermitian(4, 2, &mut rng).unwrap();
            assert!(dist(&fam.apply(&x).unwrap(), &gamma(2, &x).unwrap()) < 1e-10);
        }
        for (n, d) in [(5, 2), (4, 3), (3, 4)] {
            for r in 0..=n {
                let g = kraus_family(n, r, d).unwrap().gram();
                let dr = d_r_diag(n, r, d).unwrap();
                let off = (0..g.nrows()).flat_map(|i| (0..g.ncols()).map(move |j| (i, j)));
                for (i, j) in off {
                    let want = if i == j { dr[i] } else { 0.0 };
                    assert!((g[(i, j)] - want).abs() < 1e-12);
                }
                assert!((dr[0] - 1.0).abs() < 1e-12, "d_r(e0) = {}", dr[0]);
                assert!(dr.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn theta_is_a_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            for r in 0..=n {
                let fam = theta_family(n, r, 2).unwrap();
                let g = fam.gram();
                assert!((g - DMatrix::identity(n + 1, n + 1)).iter().all(|v| v.abs() < 1e-10));
                let x = SymTypeOperator::random_hermitian(n, 2, &mut rng).unwrap();
                let lhs = gamma(r, &x).unwrap();
                let rhs = fam.apply(&d_r_sandwich(r, &x).unwrap()).unwrap();
                assert!(dist(&lhs, &rhs) < 1e-10);
                let s = SymTypeOperator::random_state(n, 2, &mut rng).unwrap();
                assert!((theta(r, &s).unwrap().trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blur_q_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = SymTypeOperator::random_hermitian(4, 2, &mut rng).unwrap();
        assert!(dist(&blur_q(0.2, &x).unwrap(), &x) < 1e-14);
        assert!(blur_q(0.0, &x).is_err() && blur_q(0.6, &x).is_err());
        let vac = SymTypeOperator::outer(&TypeVector::vacuum(6, 2), &TypeVector::vacuum(6, 2)).unwrap();
        assert!(dist(&blur_q(0.5, &vac).unwrap(), &vac) < 1e-13);
        for n in 1..=10 {
            let w: f64 = blur_weights(n, appended_sites(n, 0.5)).unwrap().iter().sum();
            assert!((w - 1.0).abs() < 1e-12);
        }
        // Gamma compresses onto Sym^n, so only the vacuum sector keeps its weight.
        let s = SymTypeOperator::random_state(7, 3, &mut rng).unwrap();
        let tr = blur_q(0.45, &s).unwrap().trace();
        assert!(tr.re <= 1.0 + 1e-12 && tr.re > 0.0 && tr.im.abs() < 1e-14);
        let real = SymTypeOperator::new(5, 2, x_real(6, &mut rng)).unwrap();
        assert!(blur_q(0.5, &real).unwrap().matrix().iter().all(|z| z.im == 0.0));
    }

    fn x_real(len: usize, rng: &mut ChaCha8Rng) -> CMat {
        let a = DMatrix::<f64>::from_fn(len, len, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()).map(|v| C64::new(v, 0.0))
    }

    #[test]
    fn blur_rho_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zero = DenseOperator::projector(&StateVector::basis(2, 0));
        let x = SymTypeOperator::random_hermitian(2, 2, &mut rng).unwrap();
        let full = blur_rho(2, 0.5, &zero, &x.to_tensor().unwrap()).unwrap();
        let projected = SymTypeOperator::from_tensor(2, 2, &full).unwrap();
        assert!(dist(&projected, &blur_q(0.5, &x).unwrap()) < 1e-12);

        let rho = random::density(2, &mut rng);
        let y = random::density(8, &mut rng);
        let out = blur_rho(3, 0.4, &rho, &y).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!(out.sub(&symmetrize(&out, 2, 3).unwrap()).unwrap().max_abs() < 1e-13);
        let sym = blur_rho(3, 0.3, &rho, &y).unwrap();
        assert!(sym.sub(&symmetrize(&y, 2, 3).unwrap()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn averaging() {
        let w = delta_average_weights(4, 0.5).unwrap();
        // floor(4 delta) = 2 only at delta = 1/2, a null set.
        assert_eq!(w.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
        assert!((w.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = SymTypeOperator::random_state(8, 2, &mut rng).unwrap();
        let exact = blur_q_averaged_exact(0.5, &x).unwrap();
        assert!(dist(&blur_q_averaged(0.5, 256, &x).unwrap(), &exact) < 1e-12);
        assert!(dist(&blur_q_averaged(0.5, 3, &x).unwrap(), &exact) > 1e-6);
    }

    #[test]
    fn tail_filtering() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in 2..8 {
            let (t, v, z) = random_tail_instance(dim, &mut rng);
            let rep = check_tail_filtering(&t, &v, &z).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        }
        let (_, v, z) = random_tail_instance(5, &mut rng);
        let p = DenseOperator::from_mat(subspace_projector(5, &v));
        let rep = check_tail_filtering(&p, &v, &z).unwrap();
        assert!(rep.mu.unwrap() < 1e-12 && rep.rhs.abs() < 1e-12 && rep.lhs < 1e-12);
        let rep = check_tail_filtering(&p, &v, &DenseOperator::zeros(5)).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
        let rep = check_tail_filtering(&p.scale(0.5), &v, &z).unwrap();
        assert_eq!(rep.verdict, Verdict::Inapplicable);
    }

    #[test]
    fn output_norm_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut x = SymTypeOperator::random_hermitian(20, 2, &mut rng).unwrap();
        clear_low_block(&mut x, 10);
        let rep = check_output_norm(10, 0.4, &x).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.slack > 0.0);
        let y = SymTypeOperator::random_hermitian(20, 2, &mut rng).unwrap();
        assert_eq!(check_output_norm(10, 0.4, &y).unwrap().verdict, Verdict::Inapplicable);
    }

    #[test]
    fn d_r_bound_small() {
        for n in 1..=12 {
            for r in 0..=n {
                for occ in 0..=n {
                    assert_eq!(check_d_r_bound(n, r, 2, occ).unwrap().verdict, Verdict::Pass);
                }
            }
        }
    }

    #[test]
    fn proxy_is_monotone() {
        let p = blurring_proxy(12, 0.2, 0.5, 32, &[0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(p.is_nonincreasing(), "{p:?}");
        assert!(p.values[0] > 0.0);
    }

    #[test]
    fn chain_on_qubits() {
        let gens = vec![
            DenseOperator::projector(&StateVector::basis(2, 0)),
            DenseOperator::projector(&StateVector::basis(2, 1)),
            DenseOperator::projector(&StateVector::from_real(&[0.5f64.sqrt(), 0.5f64.sqrt()])),
        ];
        let fam = crate::free_sets::build_product_family(gens, 3).unwrap();
        let rho = DenseOperator::projector(&StateVector::from_real(&[0.8f64.sqrt(), -(0.2f64.sqrt())]));
        let rep = check_gqsl_chain(&rho, None, &fam, 2, 0.5, Some(1.0), &ChainOptions::default()).unwrap();
        assert_eq!(rep.m, 1);
        for r in &rep.records {
            assert!(!r.verdict.is_fail(), "{r:?}");
        }
        assert_eq!(rep.verdict(), Verdict::Pass, "{rep:#?}");
    }
}
