//! Complex numbers with a separate binary exponent, for products whose
//! partial results leave the `f64` range even though the final value does not.

use std::ops::{Div, DivAssign, Mul, MulAssign};

use num_complex::Complex64;

/// `mant · 2^exp` with `max(|re|, |im|)` of `mant` in `[1, 2)` unless zero
/// or non-finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    mant: Complex64,
    exp: i64,
}

fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut x = x;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if !x.is_finite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Scaled {
    pub const ONE: Scaled = Scaled { mant: Complex64 { re: 1.0, im: 0.0 }, exp: 0 };

    pub fn new(z: Complex64) -> Self {
        Scaled { mant: z, exp: 0 }.normalized()
    }

    fn normalized(mut self) -> Self {
        let m = self.mant.re.abs().max(self.mant.im.abs());
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        let e = m.log2().floor() as i64;
        self.mant = self.mant.scale(ldexp(1.0, -e / 2)).scale(ldexp(1.0, e / 2 - e));
        self.exp += e;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant == Complex64::new(0.0, 0.0)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(ldexp(self.mant.re, self.exp), ldexp(self.mant.im, self.exp))
    }

    /// `log2 |z|`; `-inf` for zero.
    pub fn log2_norm(&self) -> f64 {
        self.mant.norm().log2() + self.exp as f64
    }

    pub fn powi(self, n: i32) -> Self {
        let mut out = Scaled::ONE;
        let mut base = if n < 0 { Scaled::ONE / self } else { self };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                out *= base;
            }
            base *= base;
            k >>= 1;
        }
        out
    }
}

impl From<Complex64> for Scaled {
    fn from(z: Complex64) -> Self {
        Scaled::new(z)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled { mant: self.mant * o.mant, exp: self.exp + o.exp }.normalized()
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        Scaled { mant: self.mant / o.mant, exp: self.exp - o.exp }.normalized()
    }
}

impl Mul<Complex64> for Scaled {
    type Output = Scaled;
    fn mul(self, o: Complex64) -> Scaled {
        self * Scaled::new(o)
    }
}

impl Div<Complex64> for Scaled {
    type Output = Scaled;
    fn div(self, o: Complex64) -> Scaled {
        self / Scaled::new(o)
    }
}

impl MulAssign for Scaled {
    fn mul_assign(&mut self, o: Scaled) {
        *self = *self * o;
    }
}

impl DivAssign for Scaled {
    fn div_assign(&mut self, o: Scaled) {
        *self = *self / o;
    }
}

impl MulAssign<Complex64> for Scaled {
    fn mul_assign(&mut self, o: Complex64) {
        *self = *self * o;
    }
}

impl DivAssign<Complex64> for Scaled {
    fn div_assign(&mut self, o: Complex64) {
        *self = *self / o;
    }
}
