//! Type vectors (empirical distributions of sequences), type classes and
//! exact combinatorics.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{precondition, Error, Result};

/// Exact big-integer count.
pub type BigCount = BigUint;

/// Largest number of types `enumerate_types` will materialise.
pub const MAX_TYPES: u128 = 10_000_000;

/// Integer counts `n t(x)` of a type of length `n` over an alphabet of size `counts.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawType")]
pub struct TypeVector {
    n: usize,
    counts: Vec<usize>,
}

#[derive(Deserialize)]
struct RawType {
    n: usize,
    counts: Vec<usize>,
}

impl TryFrom<RawType> for TypeVector {
    type Error = Error;

    fn try_from(raw: RawType) -> Result<Self> {
        TypeVector::with_length(raw.n, raw.counts)
    }
}

impl TypeVector {
    /// Type with the given counts; the length is their sum.
    pub fn new(counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        Self { n, counts }
    }

    /// Type with a declared length, checked against the counts.
    pub fn with_length(n: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Parse("type over an empty alphabet".into()));
        }
        let sum = counts.iter().try_fold(0usize, |a, &c| a.checked_add(c));
        if sum != Some(n) {
            return Err(Error::Parse(format!("counts sum to {sum:?}, expected n = {n}")));
        }
        Ok(Self { n, counts })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// All `n` symbols equal to symbol 0.
    pub fn vacuum(n: usize, alphabet: usize) -> Self {
        let mut counts = vec![0; alphabet];
        counts[0] = n;
        Self { n, counts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    /// Empirical frequencies `t(x)`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Counts of symbols other than 0, i.e. occupation numbers.
    pub fn occupations(&self) -> &[usize] {
        &self.counts[1..]
    }
}

/// Number of types of length `n` over `k` symbols, `C(n + k - 1, k - 1)`.
pub fn type_count(n: usize, k: usize) -> BigCount {
    if k == 0 {
        return BigUint::zero();
    }
    binomial_big(n + k - 1, k - 1)
}

/// All types of length `n` over `k` symbols, ordered by decreasing count of
/// symbol 0, then symbol 1, and so on; `(2, 2)` gives `(2,0), (1,1), (0,2)`.
pub fn enumerate_types(n: usize, k: usize) -> Result<Vec<TypeVector>> {
    if k == 0 {
        return precondition("alphabet size must be at least 1");
    }
    let count = type_count(n, k);
    if count > BigUint::from(MAX_TYPES) {
        return Err(Error::SizeGuard(format!("{count} types of length {n} over {k} symbols")));
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fill_types(n, 0, &mut cur, &mut out);
    Ok(out)
}

fn fill_types(rem: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
    let k = cur.len();
    if pos == k - 1 {
        cur[pos] = rem;
        out.push(TypeVector::new(cur.clone()));
        return;
    }
    for c in (0..=rem).rev() {
        cur[pos] = c;
        fill_types(rem - c, pos + 1, cur, out);
    }
}

/// Enumerated types with a reverse lookup table.
#[derive(Clone, Debug)]
pub struct TypeIndex {
    n: usize,
    k: usize,
    types: Vec<TypeVector>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl TypeIndex {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let types = enumerate_types(n, k)?;
        let lookup = types.iter().enumerate().map(|(i, t)| (t.counts.clone(), i)).collect();
        Ok(Self { n, k, types, lookup })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn get(&self, i: usize) -> &TypeVector {
        &self.types[i]
    }

    pub fn position(&self, counts: &[usize]) -> Option<usize> {
        self.lookup.get(counts).copied()
    }
}

/// `n!` as a big integer.
pub fn factorial_big(n: usize) -> BigCount {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `C(n, k)` as a big integer (zero when `k > n`).
pub fn binomial_big(n: usize, k: usize) -> BigCount {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Multinomial `n! / prod_x (n t(x))!` by the factorial ratio.
pub fn multinomial(t: &TypeVector) -> BigCount {
    let denom = t.counts.iter().fold(BigUint::one(), |acc, &c| acc * factorial_big(c));
    factorial_big(t.n) / denom
}

/// Multinomial as a telescoping product of binomials; independent of [`multinomial`].
pub fn multinomial_by_binomials(t: &TypeVector) -> BigCount {
    let mut rem = t.n;
    let mut acc = BigUint::one();
    for &c in &t.counts {
        acc *= binomial_big(rem, c);
        rem -= c;
    }
    acc
}

/// Multinomial of raw counts as an exact rational-friendly integer; zero if
/// any count is negative.
pub fn multinomial_signed(counts: &[i64]) -> BigCount {
    if counts.iter().any(|&c| c < 0) {
        return BigUint::zero();
    }
    multinomial(&TypeVector::new(counts.iter().map(|&c| c as usize).collect()))
}

const LN_FACT_TABLE: usize = 1 << 16;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Kahan-compensated running sum of ln i.
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        t.push(0.0);
        for i in 1..LN_FACT_TABLE {
            let y = (i as f64).ln() - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            t.push(sum);
        }
        t
    })
}

/// Natural log of `n!`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < LN_FACT_TABLE {
        return ln_factorial_table()[n];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + inv / 12.0 - inv * inv2 / 360.0
        + inv * inv2 * inv2 / 1260.0
}

/// Natural log of `C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Natural log of the multinomial of signed counts; `-inf` if any is negative.
pub fn ln_multinomial(counts: &[i64]) -> f64 {
    if counts.iter().any(|&c| c < 0) {
        return f64::NEG_INFINITY;
    }
    let n: i64 = counts.iter().sum();
    ln_factorial(n as usize) - counts.iter().map(|&c| ln_factorial(c as usize)).sum::<f64>()
}

/// Type of a sequence over `alphabet` symbols.
pub fn type_of_sequence(seq: &[usize], alphabet: usize) -> Result<TypeVector> {
    let mut counts = vec![0; alphabet.max(1)];
    for &x in seq {
        if x >= alphabet {
            return precondition(format!("symbol {x} outside alphabet of size {alphabet}"));
        }
        counts[x] += 1;
    }
    Ok(TypeVector::new(counts))
}

/// `max_x |t(x) - s(x)|`.
pub fn infinity_distance(t: &TypeVector, s: &[f64]) -> Result<f64> {
    if s.len() != t.alphabet() {
        return Err(Error::DimensionMismatch(format!("alphabet {} vs {}", t.alphabet(), s.len())));
    }
    Ok(t.frequencies().iter().zip(s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Elementwise `a <= b`.
pub fn leq_elementwise(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

fn check_distribution(s: &[f64]) -> Result<()> {
    if s.iter().any(|&x| !(0.0..=1.0 + 1e-12).contains(&x)) || (s.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return precondition("centre must be a probability distribution");
    }
    Ok(())
}

/// Types within infinity distance `delta` of `s` (boundary included).
///
/// Comparison is done on integer counts, `|n t(x) - n s(x)| <= n delta`,
/// with a `1e-12` relative slack for floating-point input.
pub fn type_ball(n: usize, s: &[f64], delta: f64) -> Result<Vec<TypeVector>> {
    check_distribution(s)?;
    if !(delta >= 0.0) {
        return precondition("radius must be nonnegative");
    }
    let nf = n as f64;
    let radius = nf * delta * (1.0 + 1e-12) + 1e-12;
    Ok(enumerate_types(n, s.len())?
        .into_iter()
        .filter(|t| t.counts.iter().zip(s).all(|(&c, &p)| (c as f64 - nf * p).abs() <= radius))
        .collect())
}

/// Exact rational version of [`type_ball`].
pub fn type_ball_exact(n: usize, s: &[Ratio<i64>], delta: Ratio<i64>) -> Result<Vec<TypeVector>> {
    let total: Ratio<i64> = s.iter().copied().sum();
    if total != Ratio::one() || s.iter().any(|x| *x < Ratio::zero()) {
        return precondition("centre must be a probability distribution");
    }
    let nr = Ratio::from_integer(n as i64);
    Ok(enumerate_types(n, s.len())?
        .into_iter()
        .filter(|t| {
            t.counts.iter().zip(s).all(|(&c, &p)| {
                let diff = Ratio::from_integer(c as i64) - nr * p;
                let diff = if diff < Ratio::zero() { -diff } else { diff };
                diff <= nr * delta
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn enumeration_order_and_counts() {
        let t = enumerate_types(2, 2).unwrap();
        let c: Vec<_> = t.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(c, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_types(5, 3).unwrap().len(), 21);
        assert_eq!(enumerate_types(0, 3).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(enumerate_types(1000, 10), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&TypeVector::new(vec![2, 1])), BigUint::from(3u32));
        assert_eq!(multinomial_by_binomials(&TypeVector::new(vec![2, 2, 2])), BigUint::from(90u32));
    }

    #[test]
    fn ball_example() {
        let b = type_ball(4, &[0.5, 0.5], 0.25).unwrap();
        let c: Vec<_> = b.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(c, vec![vec![3, 1], vec![2, 2], vec![1, 3]]);
        let half = Ratio::new(1, 2);
        let exact = type_ball_exact(4, &[half, half], Ratio::new(1, 4)).unwrap();
        assert_eq!(exact, b);
    }

    #[test]
    fn json_checks_length() {
        let t = TypeVector::from_json(r#"{"n":3,"counts":[1,2]}"#).unwrap();
        assert_eq!(t.n(), 3);
        assert!(TypeVector::from_json(r#"{"n":4,"counts":[1,2]}"#).is_err());
        assert!(TypeVector::from_json(r#"{"n":0,"counts":[]}"#).is_err());
    }

    #[test]
    fn ln_factorial_agrees_with_exact_and_stirling_branch() {
        for n in [0usize, 1, 5, 20, 170] {
            let exact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
            assert!((ln_factorial(n) - exact).abs() < 1e-10 * exact.max(1.0));
        }
        let n = LN_FACT_TABLE + 10;
        let direct = ln_factorial(LN_FACT_TABLE - 1) + ((LN_FACT_TABLE)..=n).map(|i| (i as f64).ln()).sum::<f64>();
        assert!((ln_factorial(n) - direct).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn type_count_matches_enumeration_and_bound(n in 0usize..12, k in 1usize..5) {
            let len = enumerate_types(n, k).unwrap().len();
            prop_assert_eq!(BigUint::from(len), type_count(n, k));
            prop_assert!((len as f64) <= ((n + 1) as f64).powi(k as i32 - 1) + 0.5);
        }

        #[test]
        fn multinomial_algorithms_agree(counts in proptest::collection::vec(0usize..9, 1..5)) {
            let t = TypeVector::new(counts);
            prop_assert_eq!(multinomial(&t), multinomial_by_binomials(&t));
        }

        #[test]
        fn type_of_sequence_sums(seq in proptest::collection::vec(0usize..3, 0..20)) {
            let t = type_of_sequence(&seq, 3).unwrap();
            prop_assert_eq!(t.n(), seq.len());
        }
    }
}
