use num_complex::Complex64;

use crate::error::{Error, Result};

/// Floor added to residual denominators so two structural zeros compare as equal.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub rel: f64,
    pub abs: f64,
    pub floor: f64,
}

impl ToleranceSpec {
    pub fn new(rel: f64, abs: f64, floor: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(rel) && ok(abs) && ok(floor)) || rel + abs <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance fields must be finite, nonnegative and rel + abs > 0 (rel={rel}, abs={abs}, floor={floor})"
            )));
        }
        Ok(Self { rel, abs, floor })
    }

    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0, floor: RESIDUAL_FLOOR }
    }

    /// `|a - b| <= abs + rel * (|a| + |b| + floor)`
    pub fn agree(&self, a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= self.abs + self.rel * (a.norm() + b.norm() + self.floor)
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self { rel: 1e-12, abs: 1e-13, floor: RESIDUAL_FLOOR }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub eps_term: f64,
    pub n_max: usize,
}

impl TruncationPolicy {
    pub fn new(eps_term: f64, n_max: usize) -> Result<Self> {
        if !(eps_term > 0.0 && eps_term < 1.0) || n_max < 8 {
            return Err(Error::InvalidArgument(format!(
                "truncation policy needs 0 < eps_term < 1 and n_max >= 8 (got {eps_term}, {n_max})"
            )));
        }
        Ok(Self { eps_term, n_max })
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { eps_term: 1e-17, n_max: 4096 }
    }
}

/// Scale-free comparison `|lhs - rhs| / (|lhs| + |rhs| + floor)`.
pub fn normalized_residual(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / (lhs.norm() + rhs.norm() + RESIDUAL_FLOOR)
}

/// Sum with a cancellation ratio `sum |t_k| / |sum t_k|` (1 for a single term).
pub fn sum_with_condition<I: IntoIterator<Item = Complex64>>(terms: I) -> (Complex64, f64) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for t in terms {
        sum += t;
        mag += t.norm();
    }
    let cond = if mag == 0.0 { 1.0 } else { mag / sum.norm().max(RESIDUAL_FLOOR) };
    (sum, cond)
}
