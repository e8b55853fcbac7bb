//! Ternary per-class verdicts and keep/ignore filtering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::uq::ClassInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Whole interval strictly above the threshold.
    Present,
    /// Whole interval strictly below the threshold.
    Absent,
    /// Threshold inside or on the boundary of the interval.
    Uncertain,
}

impl Verdict {
    pub fn code(self) -> i8 {
        match self {
            Verdict::Present => 1,
            Verdict::Absent => 0,
            Verdict::Uncertain => -1,
        }
    }
}

impl TryFrom<i8> for Verdict {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Verdict::Present),
            0 => Ok(Verdict::Absent),
            -1 => Ok(Verdict::Uncertain),
            other => Err(Error::validation(format!("invalid ternary value {other}"))),
        }
    }
}

pub fn ternary_assign(interval: &ClassInterval, threshold: f64) -> Verdict {
    if interval.lo > threshold {
        Verdict::Present
    } else if interval.hi < threshold {
        Verdict::Absent
    } else {
        Verdict::Uncertain
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryVerdict(Vec<Verdict>);

impl TernaryVerdict {
    pub fn new(v: Vec<Verdict>) -> Self {
        Self(v)
    }

    pub fn from_codes(codes: &[i8]) -> Result<Self> {
        codes.iter().map(|&c| Verdict::try_from(c)).collect::<Result<_>>().map(Self)
    }

    pub fn from_intervals(intervals: &[ClassInterval], threshold: f64) -> Self {
        Self(intervals.iter().map(|iv| ternary_assign(iv, threshold)).collect())
    }

    pub fn codes(&self) -> Vec<i8> {
        self.0.iter().map(|v| v.code()).collect()
    }

    pub fn as_slice(&self) -> &[Verdict] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn count(&self, v: Verdict) -> usize {
        self.0.iter().filter(|x| **x == v).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgnoreReason {
    /// Uncertain classes and no present class.
    UncertainOnly,
    /// Every class absent.
    AllAbsent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterOutcome {
    Keep {
        /// Binary prediction vector; at least one 1.
        prediction: Vec<u8>,
        benefit_of_doubt: bool,
        /// Uncertain classes were dropped next to a present class.
        mixed: bool,
    },
    Ignore {
        reason: IgnoreReason,
    },
}

impl FilterOutcome {
    pub fn is_keep(&self) -> bool {
        matches!(self, FilterOutcome::Keep { .. })
    }

    pub fn prediction(&self) -> Option<&[u8]> {
        match self {
            FilterOutcome::Keep { prediction, .. } => Some(prediction),
            FilterOutcome::Ignore { .. } => None,
        }
    }

    pub fn benefit_of_doubt(&self) -> bool {
        matches!(self, FilterOutcome::Keep { benefit_of_doubt: true, .. })
    }
}

/// Keep/ignore rule over a ternary verdict vector.
///
/// A lone uncertain class with every other class absent is kept as a
/// positive. Any present class keeps the sample with uncertain classes
/// mapped to absent. Otherwise the sample is ignored.
pub fn filter_prediction(v: &TernaryVerdict) -> FilterOutcome {
    let present = v.count(Verdict::Present);
    let uncertain = v.count(Verdict::Uncertain);
    if present == 0 && uncertain == 1 {
        let prediction = v.0.iter().map(|x| u8::from(*x == Verdict::Uncertain)).collect();
        return FilterOutcome::Keep {
            prediction,
            benefit_of_doubt: true,
            mixed: false,
        };
    }
    if present > 0 {
        let prediction = v.0.iter().map(|x| u8::from(*x == Verdict::Present)).collect();
        return FilterOutcome::Keep {
            prediction,
            benefit_of_doubt: false,
            mixed: uncertain > 0,
        };
    }
    FilterOutcome::Ignore {
        reason: if uncertain > 0 {
            IgnoreReason::UncertainOnly
        } else {
            IgnoreReason::AllAbsent
        },
    }
}

/// Same rule starting from raw `{-1, 0, 1}` codes.
pub fn filter_codes(codes: &[i8]) -> Result<FilterOutcome> {
    Ok(filter_prediction(&TernaryVerdict::from_codes(codes)?))
}
