//! Temporal primitives: integer epoch seconds and closed intervals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch, never negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct TimeInstant(i64);

impl TimeInstant {
    pub fn new(t: i64) -> Result<Self> {
        if t < 0 {
            return Err(Error::validation(format!("time instant must be >= 0, got {t}")));
        }
        Ok(TimeInstant(t))
    }

    pub fn seconds(self) -> i64 {
        self.0
    }
}

impl TryFrom<i64> for TimeInstant {
    type Error = Error;

    fn try_from(t: i64) -> Result<Self> {
        TimeInstant::new(t)
    }
}

impl From<TimeInstant> for i64 {
    fn from(t: TimeInstant) -> Self {
        t.0
    }
}

impl fmt::Display for TimeInstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque temporal reference tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeReference(String);

impl TimeReference {
    pub const UTC_EPOCH_SECONDS: &'static str = "utc-epoch-s";

    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::validation("time reference name is empty"));
        }
        Ok(TimeReference(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Default for TimeReference {
    fn default() -> Self {
        TimeReference(Self::UTC_EPOCH_SECONDS.to_string())
    }
}

impl TryFrom<String> for TimeReference {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        TimeReference::new(s)
    }
}

impl From<TimeReference> for String {
    fn from(r: TimeReference) -> Self {
        r.0
    }
}

#[derive(Deserialize)]
struct RawInterval {
    begin: TimeInstant,
    end: TimeInstant,
    #[serde(default)]
    tref: TimeReference,
}

/// Closed interval `[begin, end]`. An instant is an interval with `begin == end`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct TimeInterval {
    begin: TimeInstant,
    end: TimeInstant,
    tref: TimeReference,
}

impl TryFrom<RawInterval> for TimeInterval {
    type Error = Error;

    fn try_from(r: RawInterval) -> Result<Self> {
        TimeInterval::with_reference(r.begin, r.end, r.tref)
    }
}

impl TimeInterval {
    pub fn new(begin: TimeInstant, end: TimeInstant) -> Result<Self> {
        Self::with_reference(begin, end, TimeReference::default())
    }

    pub fn with_reference(begin: TimeInstant, end: TimeInstant, tref: TimeReference) -> Result<Self> {
        if begin > end {
            return Err(Error::validation(format!("interval begin {begin} is after end {end}")));
        }
        Ok(TimeInterval { begin, end, tref })
    }

    /// Convenience constructor from raw seconds.
    pub fn from_secs(begin: i64, end: i64) -> Result<Self> {
        Self::new(TimeInstant::new(begin)?, TimeInstant::new(end)?)
    }

    pub fn instant(t: TimeInstant) -> Self {
        TimeInterval {
            begin: t,
            end: t,
            tref: TimeReference::default(),
        }
    }

    pub fn begin(&self) -> TimeInstant {
        self.begin
    }

    pub fn end(&self) -> TimeInstant {
        self.end
    }

    pub fn tref(&self) -> &TimeReference {
        &self.tref
    }

    pub fn duration_secs(&self) -> i64 {
        self.end.0 - self.begin.0
    }

    pub fn contains_instant(&self, t: TimeInstant) -> bool {
        self.begin <= t && t <= self.end
    }

    pub fn contains(&self, other: &TimeInterval) -> bool {
        self.begin <= other.begin && other.end <= self.end
    }

    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        interval_overlaps(self, other)
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.begin, self.end)
    }
}

/// Closed-interval overlap; shared endpoints count.
pub fn interval_overlaps(a: &TimeInterval, b: &TimeInterval) -> bool {
    a.begin <= b.end && b.begin <= a.end
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(b: i64, e: i64) -> TimeInterval {
        TimeInterval::from_secs(b, e).unwrap()
    }

    #[test]
    fn overlap_cases() {
        assert!(interval_overlaps(&iv(0, 10), &iv(10, 20)));
        assert!(!interval_overlaps(&iv(0, 5), &iv(6, 9)));
        assert!(interval_overlaps(&iv(3, 3), &iv(3, 3)));
    }

    #[test]
    fn invariants_enforced() {
        assert!(TimeInstant::new(-1).is_err());
        assert!(TimeInterval::from_secs(10, 5).is_err());
        assert!(serde_json::from_str::<TimeInterval>(r#"{"begin":5,"end":1}"#).is_err());
        let parsed: TimeInterval = serde_json::from_str(r#"{"begin":1,"end":5}"#).unwrap();
        assert_eq!(parsed, iv(1, 5));
    }
}
