//! Dense complex linear algebra: operators, spectra, norms, partial traces,
//! symmetrisation and symmetric purification.
//!
//! Tensor products follow the Kronecker convention: the first factor is the
//! most significant digit of the row/column index.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::{tolerances, Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Largest Hilbert-space dimension accepted by the tensor-space routines.
pub const MAX_TENSOR_DIM: usize = 4096;

/// A dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: CMat,
}

impl DenseOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat(mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: CMat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMat::identity(dim, dim) }
    }

    /// Diagonal operator with real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut mat = CMat::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = C64::new(v, 0.0);
        }
        Self { mat }
    }

    /// Rank-one projector onto a (not necessarily normalised) vector.
    pub fn projector(v: &StateVector) -> Self {
        let a = &v.amps;
        Self { mat: a * a.adjoint() }
    }

    /// Builds an operator from row-major `[re, im]` pairs.
    pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix rows must all have length equal to the row count".into()));
        }
        let mut mat = CMat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if !p[0].is_finite() || !p[1].is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at ({i}, {j})")));
                }
                mat[(i, j)] = C64::new(p[0], p[1]);
            }
        }
        Ok(Self { mat })
    }

    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.mat[(i, j)].re, self.mat[(i, j)].im]).collect())
            .collect()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { mat: self.mat.scale(a) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { mat: &self.mat - &other.mat })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self { mat: &self.mat * &other.mat })
    }

    /// `A X A^dagger`.
    pub fn conjugate_by(&self, a: &CMat) -> Self {
        Self { mat: a * &self.mat * a.adjoint() }
    }

    /// Largest absolute entry of `X - X^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(1.0)
    }

    /// `(X + X^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self { mat: (&self.mat + self.mat.adjoint()).scale(0.5) }
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Errors unless the operator is a density operator within the global
    /// tolerances.
    pub fn validate_state(&self) -> Result<()> {
        let tol = tolerances();
        let defect = self.hermiticity_defect();
        if defect > tol.spectral {
            return Err(Error::NotHermitian(defect));
        }
        let spec = eigh(self)?;
        let min = spec.min();
        if min < -tol.spectral {
            return Err(Error::NotPsd(min));
        }
        let tr = self.trace().re;
        if (tr - 1.0).abs() > tol.normalization {
            return Err(Error::NotNormalized(tr));
        }
        Ok(())
    }

    pub fn validate_psd(&self) -> Result<()> {
        let tol = tolerances();
        let defect = self.hermiticity_defect();
        if defect > tol.spectral {
            return Err(Error::NotHermitian(defect));
        }
        let min = eigh(self)?.min();
        if min < -tol.spectral {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    /// Real diagonal, e.g. the distribution of a classical state.
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Hilbert–Schmidt inner product `Re Tr(A^dagger B)`.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn same_dim(a: &DenseOperator, b: &DenseOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

impl Serialize for DenseOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        DenseOperator::from_pairs(&rows).map_err(de::Error::custom)
    }
}

/// A column vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: CVec,
}

impl StateVector {
    pub fn new(amps: CVec) -> Self {
        Self { amps }
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self { amps: CVec::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))) }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= tolerances().normalization
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { amps: self.amps.unscale(n) })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { amps: self.amps.kronecker(&other.amps) }
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = self.amps.iter().map(|z| [z.re, z.im]).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(de::Error::custom("non-finite amplitude"));
        }
        Ok(Self { amps: CVec::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1]))) })
    }
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues in decreasing order.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMat,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `sum_i f(lambda_i) |v_i><v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        DenseOperator::from_mat(&scaled * self.vectors.adjoint())
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector(&self, keep: impl Fn(f64) -> bool) -> DenseOperator {
        self.map(|l| if keep(l) { 1.0 } else { 0.0 })
    }

    pub fn vector(&self, j: usize) -> StateVector {
        StateVector::new(self.vectors.column(j).into_owned())
    }
}

/// Eigen-decomposition of a Hermitian operator.
///
/// Errors with [`Error::NotHermitian`] when `X - X^dagger` exceeds the
/// spectral tolerance (relative to the largest entry).
pub fn eigh(x: &DenseOperator) -> Result<HermitianSpectrum> {
    let defect = x.hermiticity_defect();
    if defect > tolerances().spectral * x.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(eigh_unchecked(x.matrix()))
}

pub(crate) fn eigh_unchecked(m: &CMat) -> HermitianSpectrum {
    let n = m.nrows();
    if n == 0 {
        return HermitianSpectrum { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    HermitianSpectrum { values, vectors }
}

/// Cholesky factorisation of a Hermitian positive-definite matrix through
/// the real embedding `[[Re, -Im], [Im, Re]]`.
///
/// nalgebra's complex `Cholesky::new` takes a complex square root of every
/// pivot and so never rejects an indefinite input.
pub(crate) struct HermitianCholesky {
    n: usize,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl HermitianCholesky {
    /// `None` unless the Hermitian part of `m` is positive definite.
    pub fn new(m: &CMat) -> Option<Self> {
        let n = m.nrows();
        let mut r = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                r[(i, j)] = z.re;
                r[(i + n, j + n)] = z.re;
                r[(i + n, j)] = z.im;
                r[(i, j + n)] = -z.im;
            }
        }
        let chol = nalgebra::Cholesky::new(r)?;
        Some(Self { n, chol })
    }

    pub fn ln_det(&self) -> f64 {
        // The embedding has determinant (det m)^2.
        let l = self.chol.l_dirty();
        (0..2 * self.n).map(|i| l[(i, i)].ln()).sum()
    }

    pub fn inverse(&self) -> CMat {
        let inv = self.chol.inverse();
        let n = self.n;
        CMat::from_fn(n, n, |i, j| C64::new(inv[(i, j)], inv[(i + n, j)]))
    }
}

/// Eigenvalues only, decreasing.
pub fn eigenvalues(x: &DenseOperator) -> Result<Vec<f64>> {
    Ok(eigh(x)?.values)
}

/// `Tr X_+` for Hermitian `X`.
pub fn trace_positive_part(x: &DenseOperator) -> Result<f64> {
    Ok(eigh(x)?.values.iter().filter(|&&l| l > 0.0).sum())
}

/// Projector onto the strictly positive eigenspace of a Hermitian `X`.
pub fn positive_projector(x: &DenseOperator) -> Result<DenseOperator> {
    Ok(eigh(x)?.projector(|l| l > 0.0))
}

/// Singular values, decreasing.
pub fn singular_values(x: &DenseOperator) -> Vec<f64> {
    if x.dim() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = x.matrix().clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Schatten 1-norm. Uses the spectrum for Hermitian input and the SVD otherwise.
pub fn trace_norm(x: &DenseOperator) -> f64 {
    if x.hermiticity_defect() <= 1e-14 * x.max_abs().max(1.0) {
        eigh_unchecked(x.matrix()).values.iter().map(|l| l.abs()).sum()
    } else {
        singular_values(x).iter().sum()
    }
}

/// Largest singular value.
pub fn operator_norm(x: &DenseOperator) -> f64 {
    singular_values(x).first().copied().unwrap_or(0.0)
}

/// PSD square root; negative eigenvalues are clamped to zero.
pub fn psd_sqrt(x: &DenseOperator) -> Result<DenseOperator> {
    Ok(eigh(x)?.map(|l| l.max(0.0).sqrt()))
}

/// `1/2 ||rho - sigma||_1`.
pub fn trace_distance(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    Ok(0.5 * trace_norm(&rho.sub(sigma)?))
}

/// Fidelity `||sqrt(rho) sqrt(sigma)||_1` (not squared).
pub fn fidelity(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    let a = psd_sqrt(rho)?;
    let b = psd_sqrt(sigma)?;
    Ok(singular_values(&a.matmul(&b)?).iter().sum())
}

/// `Tr sqrt(rho) sqrt(sigma)`.
pub fn sqrt_overlap(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    let a = psd_sqrt(rho)?;
    let b = psd_sqrt(sigma)?;
    Ok(a.matmul(&b)?.trace().re)
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    DenseOperator::from_mat(a.matrix().kronecker(b.matrix()))
}

/// `A^{⊗n}`; `n = 0` gives the 1x1 identity.
pub fn tensor_power(a: &DenseOperator, n: usize) -> Result<DenseOperator> {
    let dim = (a.dim() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > MAX_TENSOR_DIM as u128 {
        return Err(Error::SizeGuard(format!("dimension {}^{} exceeds {}", a.dim(), n, MAX_TENSOR_DIM)));
    }
    let mut out = DenseOperator::identity(1);
    for _ in 0..n {
        out = tensor(&out, a);
    }
    Ok(out)
}

/// Partial trace over the subsystems listed in `traced` (indices into `dims`).
pub fn partial_trace(x: &DenseOperator, dims: &[usize], traced: &[usize]) -> Result<DenseOperator> {
    let total: usize = dims.iter().product();
    if total != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions multiply to {total}, operator has dimension {}",
            x.dim()
        )));
    }
    if let Some(&bad) = traced.iter().find(|&&t| t >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("no subsystem {bad}")));
    }
    let is_traced: Vec<bool> = (0..dims.len()).map(|i| traced.contains(&i)).collect();
    let kept_dim: usize = dims.iter().zip(&is_traced).filter(|(_, &t)| !t).map(|(d, _)| d).product();
    let traced_dim = total / kept_dim;
    // Split every full index into (kept index, traced index).
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dim];
    for full in 0..total {
        let mut rem = full;
        let (mut k, mut kscale, mut t, mut tscale) = (0usize, 1usize, 0usize, 1usize);
        for s in (0..dims.len()).rev() {
            let digit = rem % dims[s];
            rem /= dims[s];
            if is_traced[s] {
                t += digit * tscale;
                tscale *= dims[s];
            } else {
                k += digit * kscale;
                kscale *= dims[s];
            }
        }
        groups[t].push((k, full));
    }
    let m = x.matrix();
    let mut out = CMat::zeros(kept_dim, kept_dim);
    for g in &groups {
        for &(ka, fa) in g {
            for &(kb, fb) in g {
                out[(ka, kb)] += m[(fa, fb)];
            }
        }
    }
    Ok(DenseOperator::from_mat(out))
}

/// Index map of `U_pi` on `(C^d)^{⊗N}`: site `k` of the input is moved to
/// site `perm[k]` of the output.
pub fn permutation_index_map(d: usize, perm: &[usize]) -> Result<Vec<usize>> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Precondition("not a permutation".into()));
        }
        seen[p] = true;
    }
    let dim = checked_tensor_dim(d, n)?;
    let mut map = vec![0usize; dim];
    let mut digits = vec![0usize; n];
    let mut out_digits = vec![0usize; n];
    for (idx, slot) in map.iter_mut().enumerate() {
        index_to_digits(idx, d, &mut digits);
        for k in 0..n {
            out_digits[perm[k]] = digits[k];
        }
        *slot = digits_to_index(&out_digits, d);
    }
    Ok(map)
}

/// `U_pi X U_pi^dagger`.
pub fn apply_permutation(x: &DenseOperator, d: usize, perm: &[usize]) -> Result<DenseOperator> {
    let map = permutation_index_map(d, perm)?;
    if map.len() != x.dim() {
        return Err(Error::DimensionMismatch(format!("operator dimension {} vs {}", x.dim(), map.len())));
    }
    let m = x.matrix();
    let mut out = CMat::zeros(x.dim(), x.dim());
    for i in 0..map.len() {
        for j in 0..map.len() {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(DenseOperator::from_mat(out))
}

/// Twirl `S_N(X) = (1/N!) sum_pi U_pi X U_pi^dagger` on `(C^d)^{⊗N}`.
///
/// Averaging over the symmetric group equals averaging each entry over its
/// orbit, and two index pairs share an orbit exactly when their joint type
/// (multiset of symbol pairs) agrees, so this runs in `O(d^{2N} N)`.
pub fn symmetrize(x: &DenseOperator, d: usize, n_sites: usize) -> Result<DenseOperator> {
    let dim = checked_tensor_dim(d, n_sites)?;
    if dim != x.dim() {
        return Err(Error::DimensionMismatch(format!("operator dimension {} vs {d}^{n_sites}", x.dim())));
    }
    let digits: Vec<Vec<usize>> = (0..dim)
        .map(|i| {
            let mut v = vec![0; n_sites];
            index_to_digits(i, d, &mut v);
            v
        })
        .collect();
    let m = x.matrix();
    let mut keys = vec![0usize; dim * dim];
    let mut ids: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut acc: Vec<(C64, usize)> = Vec::new();
    let mut key = vec![0u8; d * d];
    for i in 0..dim {
        for j in 0..dim {
            key.iter_mut().for_each(|k| *k = 0);
            for s in 0..n_sites {
                key[digits[i][s] * d + digits[j][s]] += 1;
            }
            let id = *ids.entry(key.clone()).or_insert_with(|| {
                acc.push((C64::new(0.0, 0.0), 0));
                acc.len() - 1
            });
            acc[id].0 += m[(i, j)];
            acc[id].1 += 1;
            keys[i * dim + j] = id;
        }
    }
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let (s, c) = acc[keys[i * dim + j]];
            out[(i, j)] = s / c as f64;
        }
    }
    Ok(DenseOperator::from_mat(out))
}

/// Canonical symmetric purification `(sqrt(omega) ⊗ 1)|Phi>^{⊗n}` of a
/// permutation-invariant state on `(C^d)^{⊗n}`.
///
/// The output lives on `A^n ⊗ R^n` (all system sites first, then all
/// reference sites); `|Phi>` is the unnormalised maximally entangled vector.
pub fn purify_symmetric(omega: &DenseOperator, d: usize, n: usize) -> Result<StateVector> {
    omega.validate_state()?;
    let sym = symmetrize(omega, d, n)?;
    let dev = omega.sub(&sym)?.max_abs();
    if dev > tolerances().spectral.max(1e-9) {
        return Err(Error::NotPermutationInvariant(dev));
    }
    let root = psd_sqrt(omega)?;
    let dim = omega.dim();
    let mut amps = CVec::zeros(dim * dim);
    for a in 0..dim {
        for x in 0..dim {
            amps[a * dim + x] = root.matrix()[(a, x)];
        }
    }
    Ok(StateVector::new(amps))
}

pub(crate) fn checked_tensor_dim(d: usize, n: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > MAX_TENSOR_DIM as u128 {
        return Err(Error::SizeGuard(format!("dimension {d}^{n} exceeds {MAX_TENSOR_DIM}")));
    }
    Ok(dim as usize)
}

/// Base-`d` digits of `idx`, most significant first.
pub(crate) fn index_to_digits(mut idx: usize, d: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
}

pub(crate) fn digits_to_index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Random matrices for seeded campaigns.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
        CMat::from_fn(dim, dim, |_, _| gaussian(rng))
    }

    /// Haar-random unitary (QR of a Ginibre matrix with phase correction).
    pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
        let qr = ginibre(dim, rng).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..dim {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    /// Random Hermitian matrix with Gaussian entries, unit Frobenius norm.
    pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
        let g = ginibre(dim, rng);
        let h = DenseOperator::from_mat((&g + g.adjoint()).scale(0.5));
        let f = h.frobenius_norm();
        if f > 0.0 {
            h.scale(1.0 / f)
        } else {
            h
        }
    }

    /// Hilbert–Schmidt random density operator.
    pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
        let g = ginibre(dim, rng);
        let w = &g * g.adjoint();
        let tr = w.trace().re;
        DenseOperator::from_mat(w.unscale(tr))
    }

    /// Haar-random unit vector.
    pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
        let v = CVec::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        StateVector::new(v.unscale(n))
    }
}
