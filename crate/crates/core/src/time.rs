//! Simulation time in integer picoseconds and the `<int><unit>` argument syntax.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation time, in picoseconds.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const PS: u64 = 1;
    pub const NS: u64 = 1_000;
    pub const US: u64 = 1_000_000;
    pub const MS: u64 = 1_000_000_000;
    pub const S: u64 = 1_000_000_000_000;

    pub const fn from_ps(ps: u64) -> Self {
        SimTime(ps)
    }

    pub const fn from_ns(ns: u64) -> Self {
        SimTime(ns * Self::NS)
    }

    pub const fn from_us(us: u64) -> Self {
        SimTime(us * Self::US)
    }

    pub const fn from_ms(ms: u64) -> Self {
        SimTime(ms * Self::MS)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * Self::S)
    }

    pub const fn as_ps(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / Self::S as f64
    }

    pub fn checked_add(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_add(rhs.0).map(SimTime)
    }

    pub fn saturating_add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl From<u64> for SimTime {
    fn from(ps: u64) -> Self {
        SimTime(ps)
    }
}

impl From<SimTime> for u64 {
    fn from(t: SimTime) -> u64 {
        t.0
    }
}

/// Prints the largest unit that represents the value exactly, e.g. `100us`.
impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("0s");
        }
        for (unit, scale) in UNITS.iter().rev() {
            if self.0 % scale == 0 {
                return write!(f, "{}{}", self.0 / scale, unit);
            }
        }
        unreachable!("ps divides everything")
    }
}

const UNITS: [(&str, u64); 5] = [
    ("ps", SimTime::PS),
    ("ns", SimTime::NS),
    ("us", SimTime::US),
    ("ms", SimTime::MS),
    ("s", SimTime::S),
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimeParseError {
    #[error("empty time value")]
    Empty,
    #[error("time `{0}` has no unit (expected one of ps, ns, us, ms, s)")]
    MissingUnit(String),
    #[error("unknown time unit `{unit}` in `{input}`")]
    UnknownUnit { input: String, unit: String },
    #[error("invalid integer in time `{0}`")]
    BadNumber(String),
    #[error("time `{0}` overflows 64-bit picoseconds")]
    Overflow(String),
}

impl FromStr for SimTime {
    type Err = TimeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(TimeParseError::Empty);
        }
        let split = s
            .find(|c: char| !c.is_ascii_digit())
            .ok_or_else(|| TimeParseError::MissingUnit(s.to_owned()))?;
        let (digits, unit) = s.split_at(split);
        if digits.is_empty() {
            return Err(TimeParseError::BadNumber(s.to_owned()));
        }
        let scale = UNITS
            .iter()
            .find(|(name, _)| *name == unit)
            .map(|(_, scale)| *scale)
            .ok_or_else(|| TimeParseError::UnknownUnit {
                input: s.to_owned(),
                unit: unit.to_owned(),
            })?;
        let value: u64 = digits
            .parse()
            .map_err(|_| TimeParseError::Overflow(s.to_owned()))?;
        value
            .checked_mul(scale)
            .map(SimTime)
            .ok_or_else(|| TimeParseError::Overflow(s.to_owned()))
    }
}

/// Formats integer nanoseconds as seconds with six fractional digits.
pub fn ns_as_secs_string(ns: u64) -> String {
    format!("{:.6}", ns as f64 / 1e9)
}
