//! Univariate and multivariate hypergeometric laws, tail bounds and the
//! bosonic entropy function.
//!
//! `pmf(N, K; n, k)` is the probability of drawing `k` marked items when `n`
//! items are drawn without replacement from an urn of `N` items, `K` of them
//! marked. Evaluation is in log-factorial space; [`exact`] keeps a
//! big-rational path for small urns.

use serde::{Deserialize, Serialize};

use crate::types::{leq_elementwise, ln_binomial, ln_factorial, TypeVector};
use crate::{precondition, Error, Result};

fn check_urn(total: usize, marked: usize, draws: usize, hits: usize) -> Result<()> {
    if marked > total || draws > total || hits > draws {
        return precondition(format!(
            "need K <= N, n <= N, k <= n (got N={total}, K={marked}, n={draws}, k={hits})"
        ));
    }
    Ok(())
}

/// Natural log of the hypergeometric pmf; `-inf` outside the support.
pub fn ln_pmf(total: usize, marked: usize, draws: usize, hits: usize) -> Result<f64> {
    check_urn(total, marked, draws, hits)?;
    if hits > marked || draws - hits > total - marked {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_binomial(marked, hits) + ln_binomial(total - marked, draws - hits) - ln_binomial(total, draws))
}

/// `C(K, k) C(N - K, n - k) / C(N, n)`.
pub fn pmf(total: usize, marked: usize, draws: usize, hits: usize) -> Result<f64> {
    Ok(ln_pmf(total, marked, draws, hits)?.exp())
}

/// Whole distribution of the number of hits, indexed `0..=n`.
pub fn pmf_vector(total: usize, marked: usize, draws: usize) -> Result<Vec<f64>> {
    (0..=draws).map(|k| pmf(total, marked, draws, k)).collect()
}

/// Mass of `{k : |k/n - K/N| > u}`.
pub fn tail_mass(total: usize, marked: usize, draws: usize, u: f64) -> Result<f64> {
    check_urn(total, marked, draws, 0)?;
    if draws == 0 {
        return precondition("tail mass needs at least one draw");
    }
    if !(u >= 0.0) {
        return precondition("deviation must be nonnegative");
    }
    // |k/n - K/N| > u  <=>  |k N - K n| > u n N, compared on integers.
    let scale = u * (draws as f64) * (total as f64);
    let mut mass = 0.0;
    for k in 0..=draws {
        let dev = (k as i128 * total as i128 - marked as i128 * draws as i128).abs() as f64;
        if dev > scale * (1.0 + 1e-12) + 1e-12 {
            mass += pmf(total, marked, draws, k)?;
        }
    }
    Ok(mass)
}

/// The two exponential tail bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    /// `2 exp(-2 n u^2)`, valid for every draw size.
    pub basic: f64,
    /// `2 exp(-2 n^2 u^2 / (N - n))`, valid when `n >= N/2`.
    pub tight: Option<f64>,
}

impl TailBounds {
    /// The smallest applicable bound.
    pub fn best(&self) -> f64 {
        self.tight.map_or(self.basic, |t| t.min(self.basic))
    }
}

pub fn tail_bounds(total: usize, marked: usize, draws: usize, u: f64) -> Result<TailBounds> {
    check_urn(total, marked, draws, 0)?;
    let n = draws as f64;
    let basic = 2.0 * (-2.0 * n * u * u).exp();
    let tight = if 2 * draws >= total {
        let rest = (total - draws) as f64;
        Some(if rest == 0.0 {
            if u > 0.0 {
                0.0
            } else {
                2.0
            }
        } else {
            2.0 * (-2.0 * n * n * u * u / rest).exp()
        })
    } else {
        None
    };
    Ok(TailBounds { basic, tight })
}

fn check_multivariate(urn: &TypeVector, draw: &TypeVector) -> Result<()> {
    if urn.alphabet() != draw.alphabet() {
        return Err(Error::DimensionMismatch(format!("alphabet {} vs {}", urn.alphabet(), draw.alphabet())));
    }
    if draw.n() > urn.n() {
        return precondition("cannot draw more items than the urn holds");
    }
    Ok(())
}

/// `prod_x C(N s(x), n t(x)) / C(N, n)`: probability that `n` draws from an
/// urn with composition `urn` have composition `draw`.
pub fn multivariate_pmf(urn: &TypeVector, draw: &TypeVector) -> Result<f64> {
    check_multivariate(urn, draw)?;
    if !leq_elementwise(draw.counts(), urn.counts()) {
        return Ok(0.0);
    }
    let ln: f64 = urn.counts().iter().zip(draw.counts()).map(|(&a, &b)| ln_binomial(a, b)).sum::<f64>()
        - ln_binomial(urn.n(), draw.n());
    Ok(ln.exp())
}

/// Same law via `C(n, n t) C(N - n, N s - n t) / C(N, N s)` (multinomials).
pub fn multivariate_pmf_by_multinomials(urn: &TypeVector, draw: &TypeVector) -> Result<f64> {
    check_multivariate(urn, draw)?;
    if !leq_elementwise(draw.counts(), urn.counts()) {
        return Ok(0.0);
    }
    let ln_multi = |counts: &mut dyn Iterator<Item = usize>, total: usize| {
        ln_factorial(total) - counts.map(ln_factorial).sum::<f64>()
    };
    let a = ln_multi(&mut draw.counts().iter().copied(), draw.n());
    let b = ln_multi(&mut urn.counts().iter().zip(draw.counts()).map(|(u, d)| u - d), urn.n() - draw.n());
    let c = ln_multi(&mut urn.counts().iter().copied(), urn.n());
    Ok((a + b - c).exp())
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Bosonic entropy `g(x) = (x + 1) log(x + 1) - x log x`, `g(0) = 0`.
pub fn bosonic_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// Lower bound `2^{-n g(N/n - 1)}` on the multivariate pmf, valid when `n t <= N s`.
pub fn hyp_lower_bound(urn: &TypeVector, draw: &TypeVector) -> Result<f64> {
    check_multivariate(urn, draw)?;
    if draw.n() == 0 {
        return precondition("lower bound needs n >= 1");
    }
    if !leq_elementwise(draw.counts(), urn.counts()) {
        return precondition("lower bound requires n t <= N s elementwise");
    }
    let n = draw.n() as f64;
    Ok((-n * bosonic_entropy(urn.n() as f64 / n - 1.0)).exp2())
}

/// Exact big-rational evaluation.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    use super::*;
    use crate::types::binomial_big;

    pub fn pmf(total: usize, marked: usize, draws: usize, hits: usize) -> Result<BigRational> {
        check_urn(total, marked, draws, hits)?;
        if hits > marked || draws - hits > total - marked {
            return Ok(BigRational::from_integer(BigInt::from(0)));
        }
        let num = binomial_big(marked, hits) * binomial_big(total - marked, draws - hits);
        Ok(BigRational::new(num.into(), binomial_big(total, draws).into()))
    }

    pub fn multivariate_pmf(urn: &TypeVector, draw: &TypeVector) -> Result<BigRational> {
        check_multivariate(urn, draw)?;
        if !leq_elementwise(draw.counts(), urn.counts()) {
            return Ok(BigRational::from_integer(BigInt::from(0)));
        }
        let num = urn
            .counts()
            .iter()
            .zip(draw.counts())
            .fold(num_bigint::BigUint::from(1u32), |acc, (&a, &b)| acc * binomial_big(a, b));
        Ok(BigRational::new(num.into(), binomial_big(urn.n(), draw.n()).into()))
    }
}
