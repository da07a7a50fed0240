//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here shares code with the production maps beyond the operator
//! containers: tensor indices, permutations, partial traces and the
//! symmetric basis are all rebuilt from scratch by direct enumeration.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::linalg::{CMat, DenseOperator, C64, MAX_TENSOR_DIM};
use crate::quantum_blurring::SymTypeOperator;
use crate::types::TypeIndex;
use crate::{precondition, Error, Result};

fn digits(mut i: usize, d: usize, sites: usize) -> Vec<usize> {
    let mut out = vec![0; sites];
    for s in (0..sites).rev() {
        out[s] = i % d;
        i /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

fn tensor_dim(d: usize, sites: usize) -> Result<usize> {
    d.checked_pow(sites as u32)
        .filter(|&v| v <= MAX_TENSOR_DIM)
        .ok_or_else(|| Error::SizeGuard(format!("{d}^{sites} exceeds {MAX_TENSOR_DIM}")))
}

/// Isometry onto the symmetric subspace, built by bucketing every sequence
/// by its letter counts.
pub fn naive_sym_isometry(n: usize, d: usize) -> Result<CMat> {
    let index = TypeIndex::new(n, d)?;
    let dim = tensor_dim(d, n)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); index.len()];
    for i in 0..dim {
        let mut counts = vec![0; d];
        for x in digits(i, d, n) {
            counts[x] += 1;
        }
        members[index.position(&counts).expect("every count vector is a type")].push(i);
    }
    let mut v = CMat::zeros(dim, index.len());
    for (col, seqs) in members.iter().enumerate() {
        let a = 1.0 / (seqs.len() as f64).sqrt();
        for &i in seqs {
            v[(i, col)] = C64::new(a, 0.0);
        }
    }
    Ok(v)
}

/// Trace over the last `traced` of `sites` tensor factors by explicit loops.
pub fn naive_partial_trace_tail(x: &DenseOperator, d: usize, sites: usize, traced: usize) -> Result<DenseOperator> {
    if traced > sites || tensor_dim(d, sites)? != x.dim() {
        return Err(Error::DimensionMismatch(format!("cannot trace {traced} of {sites} sites of dimension {d}")));
    }
    let keep = tensor_dim(d, sites - traced)?;
    let env = tensor_dim(d, traced)?;
    let mut out = CMat::zeros(keep, keep);
    for a in 0..keep {
        for b in 0..keep {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env {
                acc += x.matrix()[(a * env + e, b * env + e)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DenseOperator::from_mat(out))
}

/// `(1/N!) sum_pi U_pi X U_pi^dagger`, summing over every permutation.
pub fn naive_symmetrize(x: &DenseOperator, d: usize, sites: usize) -> Result<DenseOperator> {
    let dim = tensor_dim(d, sites)?;
    if x.dim() != dim {
        return Err(Error::DimensionMismatch(format!("operator dimension {} vs {d}^{sites}", x.dim())));
    }
    if sites > 8 {
        return Err(Error::SizeGuard(format!("{sites}! permutations")));
    }
    let seqs: Vec<Vec<usize>> = (0..dim).map(|i| digits(i, d, sites)).collect();
    let mut acc = CMat::zeros(dim, dim);
    let mut count = 0usize;
    for perm in (0..sites).permutations(sites) {
        let map: Vec<usize> = seqs.iter().map(|s| undigits(&perm.iter().map(|&p| s[p]).collect::<Vec<_>>(), d)).collect();
        for i in 0..dim {
            for j in 0..dim {
                acc[(map[i], map[j])] += x.matrix()[(i, j)];
            }
        }
        count += 1;
    }
    Ok(DenseOperator::from_mat(acc.unscale(count as f64)))
}

fn naive_kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, rb) = (a.nrows(), b.nrows());
    CMat::from_fn(ra * rb, ra * rb, |i, j| a[(i / rb, j / rb)] * b[(i % rb, j % rb)])
}

fn naive_power(a: &CMat, k: usize) -> CMat {
    (0..k).fold(CMat::identity(1, 1), |acc, _| naive_kron(&acc, a))
}

/// `Pi_sym (Tr_r X ⊗ |0><0|^{⊗r}) Pi_sym` in the type basis.
pub fn naive_gamma(r: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let (n, d) = (x.n(), x.d());
    if r > n {
        return precondition(format!("r = {r} exceeds n = {n}"));
    }
    let v = naive_sym_isometry(n, d)?;
    let full = DenseOperator::from_mat(&v * x.matrix() * v.adjoint());
    let reduced = naive_partial_trace_tail(&full, d, n, r)?;
    let mut vac = CMat::zeros(d, d);
    vac[(0, 0)] = C64::new(1.0, 0.0);
    let padded = naive_kron(reduced.matrix(), &naive_power(&vac, r));
    SymTypeOperator::new(n, d, v.adjoint() * padded * &v)
}

/// `Tr_m S_{n+m}(X ⊗ sigma^{⊗m})` on the full tensor space.
pub fn naive_blur_with(n: usize, m: usize, sigma: &DenseOperator, x: &DenseOperator) -> Result<DenseOperator> {
    let d = sigma.dim();
    if tensor_dim(d, n)? != x.dim() {
        return Err(Error::DimensionMismatch(format!("operator dimension {} vs {d}^{n}", x.dim())));
    }
    tensor_dim(d, n + m)?;
    let big = DenseOperator::from_mat(naive_kron(x.matrix(), &naive_power(sigma.matrix(), m)));
    let sym = naive_symmetrize(&big, d, n + m)?;
    naive_partial_trace_tail(&sym, d, n + m, m)
}

/// Symmetric-subspace blurring with `m` appended vacuum sites: embed, append,
/// symmetrise, trace out, compress.
pub fn naive_blur_q(m: usize, x: &SymTypeOperator) -> Result<SymTypeOperator> {
    let (n, d) = (x.n(), x.d());
    let v = naive_sym_isometry(n, d)?;
    let full = DenseOperator::from_mat(&v * x.matrix() * v.adjoint());
    let mut vac = CMat::zeros(d, d);
    vac[(0, 0)] = C64::new(1.0, 0.0);
    let out = naive_blur_with(n, m, &DenseOperator::from_mat(vac), &full)?;
    SymTypeOperator::new(n, d, v.adjoint() * out.matrix() * &v)
}

/// Classical blurring kernel by enumeration: for each input type `u`, lay out
/// a representative sequence followed by `m` copies of every symbol and
/// count, over all `n`-subsets of positions, the type of the kept letters.
/// `kernel[u][t]` is exact.
pub fn naive_classical_kernel(n: usize, m: usize, alphabet: usize) -> Result<Vec<Vec<BigRational>>> {
    let index = TypeIndex::new(n, alphabet)?;
    let urn_len = n + m * alphabet;
    if urn_len > 24 {
        return Err(Error::SizeGuard(format!("subsets of a {urn_len}-letter sequence")));
    }
    index
        .types()
        .iter()
        .map(|u| {
            let mut seq: Vec<usize> = Vec::with_capacity(urn_len);
            for (x, &c) in u.counts().iter().enumerate() {
                seq.extend(std::iter::repeat(x).take(c + m));
            }
            let mut tally = vec![BigInt::zero(); index.len()];
            let mut total = BigInt::zero();
            for subset in (0..urn_len).combinations(n) {
                let mut counts = vec![0; alphabet];
                for p in subset {
                    counts[seq[p]] += 1;
                }
                tally[index.position(&counts).expect("valid type")] += BigInt::one();
                total += BigInt::one();
            }
            Ok(tally.into_iter().map(|c| BigRational::new(c, total.clone())).collect())
        })
        .collect()
}
