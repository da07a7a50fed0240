//! Verdicts and certified brackets shared by the lemma checks.

use serde::{Deserialize, Serialize};

/// Outcome of a single inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Certificates are too loose to decide.
    Inconclusive,
    /// Preconditions of the statement do not hold for this instance.
    Inapplicable,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    /// `Fail` dominates `Inconclusive`, which dominates `Pass`.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Pass, _) | (_, Pass) => Pass,
            _ => Inapplicable,
        }
    }
}

/// Interval known to contain a quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn exact(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo: lo.min(hi), hi: hi.max(lo) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn add(self, o: Bracket) -> Bracket {
        Bracket { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    pub fn shift(self, c: f64) -> Bracket {
        Bracket { lo: self.lo + c, hi: self.hi + c }
    }
}

/// Decides `lhs <= rhs + tol` given brackets for both sides.
pub fn certify_le(lhs: Bracket, rhs: Bracket, tol: f64) -> Verdict {
    if lhs.hi <= rhs.lo + tol {
        Verdict::Pass
    } else if lhs.lo > rhs.hi + tol {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// One line of a check report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

impl CheckRecord {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64, detail: impl Into<String>) -> Self {
        let verdict = if lhs <= rhs + tol { Verdict::Pass } else { Verdict::Fail };
        Self { name: name.into(), verdict, lhs, rhs, detail: detail.into() }
    }

    pub fn bracketed(name: impl Into<String>, lhs: Bracket, rhs: Bracket, tol: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), verdict: certify_le(lhs, rhs, tol), lhs: lhs.hi, rhs: rhs.lo, detail: detail.into() }
    }
}

/// Tally of verdicts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub inapplicable: usize,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Inconclusive => self.inconclusive += 1,
            Verdict::Inapplicable => self.inapplicable += 1,
        }
    }

    pub fn from_verdicts(vs: impl IntoIterator<Item = Verdict>) -> Self {
        let mut t = Tally::default();
        vs.into_iter().for_each(|v| t.add(v));
        t
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.inconclusive + self.inapplicable
    }
}

/// Serde helper writing non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}
