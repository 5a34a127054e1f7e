//! Compensated summation.
//!
//! The sign-permutation sums of the closed forms and the series partial sums
//! both go through [`NeumaierSum`], so results do not depend on anything but
//! the order in which terms are added.

use std::ops::AddAssign;

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
    largest: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
        self.largest = self.largest.max(value.abs());
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Largest magnitude of any single term added so far.
    pub fn largest_term(&self) -> f64 {
        self.largest
    }

    /// True when the terms cancelled to below `ratio` times the largest term.
    pub fn cancelled_below(&self, ratio: f64) -> bool {
        self.largest > 0.0 && self.value().abs() < ratio * self.largest
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}
