use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sliding window length, shift and DTW warping band, all in time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub omega: usize,
    pub delta: usize,
    pub beta: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            omega: 40,
            delta: 10,
            beta: 10,
        }
    }
}

impl WindowSpec {
    pub fn new(omega: usize, delta: usize, beta: usize) -> Result<Self> {
        let spec = WindowSpec { omega, delta, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega < 2 {
            return Err(Error::InvalidWindow(format!(
                "omega must be >= 2, got {}",
                self.omega
            )));
        }
        if !(1..=self.omega).contains(&self.delta) {
            return Err(Error::InvalidWindow(format!(
                "delta must be in [1, omega={}], got {}",
                self.omega, self.delta
            )));
        }
        if !(1..=self.omega).contains(&self.beta) {
            return Err(Error::InvalidWindow(format!(
                "beta must be in [1, omega={}], got {}",
                self.omega, self.beta
            )));
        }
        Ok(())
    }

    /// Number of complete windows over a series of length `t`.
    pub fn window_count(&self, t: usize) -> usize {
        if t < self.omega {
            0
        } else {
            (t - self.omega) / self.delta + 1
        }
    }

    /// The warping band expressed in windows, rounded up; the default merge gap.
    pub fn beta_in_windows(&self) -> usize {
        self.beta.div_ceil(self.delta)
    }

    /// Time steps covered by the windows `first..=last`.
    pub fn steps_covered(&self, first: usize, last: usize) -> Range<usize> {
        first * self.delta..last * self.delta + self.omega
    }
}

/// Half-open time-step interval of window `k`.
pub fn window_interval(k: usize, spec: &WindowSpec, t: usize) -> Result<Range<usize>> {
    let start = k * spec.delta;
    let end = start + spec.omega;
    if end > t {
        return Err(Error::WindowOutOfRange {
            index: k,
            start,
            end,
            len: t,
        });
    }
    Ok(start..end)
}
