//! Small numeric helpers: quadrature and mergeable moment accumulators.

/// Composite Simpson rule with `n` (rounded up to even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Trapezoid weights on `[lo, hi]` with the coarsest uniform step not above `h`.
pub fn trapezoid_grid(lo: f64, hi: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = ((hi - lo) / h - 1e-9).ceil().max(1.0) as usize;
    let step = (hi - lo) / n as f64;
    let nodes = (0..=n).map(|k| lo + k as f64 * step).collect();
    let weights = (0..=n)
        .map(|k| if k == 0 || k == n { step / 2.0 } else { step })
        .collect();
    (nodes, weights)
}

/// Running count, mean and centered second moment (Welford), mergeable
/// across batches (Chan et al.).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl From<Moments> for Estimate {
    fn from(m: Moments) -> Self {
        Estimate {
            estimate: m.mean,
            std_error: m.std_error(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_integrates_sine() {
        assert_abs_diff_eq!(simpson(f64::sin, 0.0, std::f64::consts::PI, 1000), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let (x, w) = trapezoid_grid(0.2, 1.7, 0.1);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.5, epsilon = 1e-12);
        assert_eq!(x.len(), 16);
        assert_abs_diff_eq!(*x.last().unwrap(), 1.7, epsilon = 1e-12);
    }

    #[test]
    fn merged_moments_match_pooled() {
        let xs: Vec<f64> = (0..1000).map(|k| ((k * 37) % 101) as f64 * 0.3 - 4.0).collect();
        let all: Moments = xs.iter().copied().collect();
        let a: Moments = xs[..313].iter().copied().collect();
        let b: Moments = xs[313..].iter().copied().collect();
        let m = a.merge(&b);
        assert_eq!(m.n, all.n);
        assert_abs_diff_eq!(m.mean, all.mean, epsilon = 1e-12);
        assert_abs_diff_eq!(m.variance(), all.variance(), epsilon = 1e-9);
    }
}
