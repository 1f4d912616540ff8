//! Double-double arithmetic (about 106 significant bits).
//!
//! Used only while assembling and solving the GP kernel systems; results are
//! rounded to `f64` once at the end.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141_592_653_589_793,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const LN2: Dd = Dd {
        hi: 6.931_471_805_599_453e-1,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub const fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    /// Exact for integers and ratios of small integers up to the last bit of the result.
    pub fn ratio(num: f64, den: f64) -> Dd {
        Dd::new(num) / Dd::new(den)
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::ZERO
            } else {
                Dd::new(f64::NAN)
            };
        }
        // One Newton step from the f64 root doubles the accurate bits.
        let x = self.hi.sqrt();
        let r = Dd::new(x);
        let diff = self - r * r;
        r + Dd::new(diff.hi / (2.0 * x))
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2.mul_f64(k);
        // exp(r) = (exp(r / 2^m))^(2^m)
        const M: i32 = 10;
        let s = r.mul_f64(1.0 / (1 << M) as f64);
        // expm1 by Taylor series.
        let mut term = s;
        let mut sum = s;
        let mut n = 2.0;
        loop {
            term = term * s / Dd::new(n);
            sum = sum + term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs() {
                break;
            }
            n += 1.0;
        }
        // (1 + e)^2 - 1 = 2e + e^2
        for _ in 0..M {
            sum = sum.mul_f64(2.0) + sum * sum;
        }
        let res = sum + Dd::ONE;
        Dd {
            hi: res.hi * 2f64.powi(k as i32),
            lo: res.lo * 2f64.powi(k as i32),
        }
    }

    /// Error function via erf(x) = 2/√π · e^{−x²} · Σ 2ⁿ x^{2n+1} / (2n+1)!!,
    /// a series of positive terms (no cancellation).
    pub fn erf(self) -> Dd {
        let x = self.abs();
        if x.hi >= 10.0 {
            return if self.hi < 0.0 { -Dd::ONE } else { Dd::ONE };
        }
        if x.hi == 0.0 {
            return Dd::ZERO;
        }
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 1.0;
        loop {
            term = term * x2.mul_f64(2.0) / Dd::new(2.0 * n + 1.0);
            sum = sum + term;
            if term.hi < 1e-35 * sum.hi {
                break;
            }
            n += 1.0;
        }
        let val = sum * (-x2).exp() * Dd::new(2.0) / Dd::PI.sqrt();
        if self.hi < 0.0 {
            -val
        } else {
            val
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}
