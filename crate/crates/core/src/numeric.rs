//! Small floating-point helpers shared by the analytic and simulation code.

/// Neumaier's variant of Kahan summation.
///
/// Keeps a running correction term so that alternating sums with large,
/// nearly cancelling terms retain roughly twice the working precision.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    largest_term: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
        self.largest_term = self.largest_term.max(term.abs());
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Largest absolute term seen so far; used to judge cancellation.
    pub fn largest_term(&self) -> f64 {
        self.largest_term
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for term in iter {
            self.add(term);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}

/// Binomial coefficient `C(n, k)` as a float. Exact for the relay counts we
/// support (well below 2^53).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as f64
}
