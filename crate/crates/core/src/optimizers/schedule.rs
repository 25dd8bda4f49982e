use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Constant rate over the 1-based, inclusive epoch range `[first, last]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment<T> {
    pub first: usize,
    pub last: usize,
    pub rate: T,
}

/// Piecewise-constant learning rate over epochs `1..=last_epoch()`.
///
/// Segments are contiguous, start at epoch 1 and do not overlap. Rates must be
/// finite and nonnegative; a zero rate freezes the parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ScheduleSegment<T>>", into = "Vec<ScheduleSegment<T>>")]
#[serde(bound = "T: Scalar")]
pub struct LrSchedule<T> {
    segments: Vec<ScheduleSegment<T>>,
}

impl<T: Scalar> LrSchedule<T> {
    pub fn new(segments: Vec<ScheduleSegment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config(
                "learning-rate schedule has no segments".into(),
            ));
        }
        let mut expected_first = 1;
        for s in &segments {
            if s.first != expected_first || s.last < s.first {
                return Err(Error::Config(format!(
                    "schedule segment {}..={} is not contiguous (expected to start at epoch {expected_first})",
                    s.first, s.last
                )));
            }
            if !(s.rate.is_finite() && s.rate >= T::zero()) {
                return Err(Error::Config(format!(
                    "schedule rate {} for epochs {}..={} must be finite and nonnegative",
                    s.rate, s.first, s.last
                )));
            }
            expected_first = s.last + 1;
        }
        Ok(LrSchedule { segments })
    }

    pub fn constant(rate: T, epochs: usize) -> Result<Self> {
        Self::new(vec![ScheduleSegment {
            first: 1,
            last: epochs.max(1),
            rate,
        }])
    }

    /// Adam/AdamW row of the reference experiment: 1e-4 for epochs 1–9,
    /// 1e-5 for epochs 10–20.
    pub fn reference_adam() -> Self {
        Self::new(vec![
            ScheduleSegment {
                first: 1,
                last: 9,
                rate: T::lit(1e-4),
            },
            ScheduleSegment {
                first: 10,
                last: 20,
                rate: T::lit(1e-5),
            },
        ])
        .expect("valid preset")
    }

    /// SGD row of the reference experiment: 1e-3, 2e-4, 4e-5 over
    /// epochs 1–9, 10–14, 15–20.
    pub fn reference_sgd() -> Self {
        Self::new(vec![
            ScheduleSegment {
                first: 1,
                last: 9,
                rate: T::lit(1e-3),
            },
            ScheduleSegment {
                first: 10,
                last: 14,
                rate: T::lit(2e-4),
            },
            ScheduleSegment {
                first: 15,
                last: 20,
                rate: T::lit(4e-5),
            },
        ])
        .expect("valid preset")
    }

    pub fn segments(&self) -> &[ScheduleSegment<T>] {
        &self.segments
    }

    pub fn last_epoch(&self) -> usize {
        self.segments.last().map_or(0, |s| s.last)
    }

    /// Rate for a 1-based epoch.
    pub fn rate_at(&self, epoch: usize) -> Result<T> {
        self.segments
            .iter()
            .find(|s| (s.first..=s.last).contains(&epoch))
            .map(|s| s.rate)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "epoch {epoch} outside schedule range 1..={}",
                    self.last_epoch()
                ))
            })
    }

    pub fn max_rate(&self) -> T {
        self.segments.iter().map(|s| s.rate).fold(T::zero(), T::max)
    }

    /// Per-step rates for `steps_per_epoch` steps in each epoch.
    pub fn per_step_rates(&self, steps_per_epoch: usize) -> Vec<T> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.rate, (s.last - s.first + 1) * steps_per_epoch))
            .collect()
    }
}

impl<T: Scalar> TryFrom<Vec<ScheduleSegment<T>>> for LrSchedule<T> {
    type Error = Error;
    fn try_from(v: Vec<ScheduleSegment<T>>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<LrSchedule<T>> for Vec<ScheduleSegment<T>> {
    fn from(s: LrSchedule<T>) -> Self {
        s.segments
    }
}
