//! Outward-rounded interval arithmetic over `f64` and rectangular complex
//! boxes built on it.
//!
//! Basic operations are correctly rounded by IEEE 754. The sign of the
//! rounding error is recovered exactly (TwoSum for sums, fused multiply-add
//! residuals for products, quotients and square roots), and the endpoint
//! is moved one ulp outward only when the error points outward. The libm
//! transcendental functions are not correctly rounded; their results are
//! widened by two ulps, twice the documented error bound of glibc.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Extra ulps applied to results of `ln`, `atan2`, `sqrt`.
const TRANSCENDENTAL_ULPS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64, ulps: u32) -> f64 {
    let mut y = x;
    for _ in 0..ulps {
        y = y.next_down();
    }
    y
}

fn up(x: f64, ulps: u32) -> f64 {
    let mut y = x;
    for _ in 0..ulps {
        y = y.next_up();
    }
    y
}

/// Rounding error sign of `x + y` computed as `s`: true sum minus `s`.
fn sum_err(x: f64, y: f64, s: f64) -> f64 {
    if !s.is_finite() {
        return 0.0;
    }
    let bb = s - x;
    (x - (s - bb)) + (y - bb)
}

/// True product minus computed product `p`.
fn mul_err(x: f64, y: f64, p: f64) -> f64 {
    if !p.is_finite() || (p != 0.0 && p.abs() < 1e-290) || (p == 0.0 && x != 0.0 && y != 0.0) {
        // underflow: the residual is not exact, so report both directions
        return f64::NAN;
    }
    x.mul_add(y, -p)
}

/// Rounds `v` (with error `e` = true minus `v`) down.
fn lower(v: f64, e: f64) -> f64 {
    if e < 0.0 || e.is_nan() {
        v.next_down()
    } else {
        v
    }
}

fn upper(v: f64, e: f64) -> f64 {
    if e > 0.0 || e.is_nan() {
        v.next_up()
    } else {
        v
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Degenerate interval holding an exactly representable value.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of an integer that may not be representable.
    pub fn from_i128(n: i128) -> Self {
        let x = n as f64;
        if x as i128 == n && x.abs() < 9.0e15 {
            Interval::point(x)
        } else {
            Interval::new(x.next_down(), x.next_up())
        }
    }

    /// Enclosure of the rational `num / den`.
    pub fn ratio(num: i128, den: i128) -> Self {
        Interval::from_i128(num) / Interval::from_i128(den)
    }

    /// Smallest interval around `x +- r`.
    pub fn around(x: f64, r: f64) -> Self {
        Interval::new(down(x - r, 1), up(x + r, 1))
    }

    /// Enclosure of pi; the `f64` constant lies just below it.
    pub fn pi() -> Self {
        Interval::new(std::f64::consts::PI, std::f64::consts::PI.next_up())
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            return 0.0;
        }
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn width(&self) -> f64 {
        up(self.hi - self.lo, 1)
    }

    /// Largest distance from the midpoint to an endpoint.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        up((m - self.lo).max(self.hi - m), 1)
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self` lies strictly inside `other`.
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn sqr(self) -> Interval {
        let m = self.mag();
        let hi = m * m;
        let hi = upper(hi, mul_err(m, m, hi));
        if self.contains_zero() {
            Interval::new(0.0, hi)
        } else {
            let n = self.lo.abs().min(self.hi.abs());
            let lo = n * n;
            Interval::new(lower(lo, mul_err(n, n, lo)), hi)
        }
    }

    pub fn sqrt(self) -> Interval {
        let root = |x: f64| {
            let s = x.max(0.0).sqrt();
            // x - s^2, exact unless s^2 underflows
            let r = if s.is_finite() && s > 1e-140 { (-s).mul_add(s, x.max(0.0)) } else { f64::NAN };
            (s, r)
        };
        let (a, ra) = root(self.lo);
        let (b, rb) = root(self.hi);
        Interval::new(lower(a, ra).max(0.0), upper(b, rb))
    }

    /// Natural logarithm; the interval must be positive.
    pub fn ln(self) -> Interval {
        if self.lo <= 0.0 {
            return Interval::new(f64::NEG_INFINITY, up(self.hi.ln(), TRANSCENDENTAL_ULPS));
        }
        Interval::new(down(self.lo.ln(), TRANSCENDENTAL_ULPS), up(self.hi.ln(), TRANSCENDENTAL_ULPS))
    }

    pub fn abs(self) -> Interval {
        if self.contains_zero() {
            Interval::new(0.0, self.mag())
        } else {
            Interval::new(self.lo.abs().min(self.hi.abs()), self.mag())
        }
    }

    /// Widen symmetrically by `r`.
    pub fn inflate(self, r: f64) -> Interval {
        Interval::new(down(self.lo - r, 1), up(self.hi + r, 1))
    }

    pub fn powi(self, n: u32) -> Interval {
        let mut acc = Interval::ONE;
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        let (lo, hi) = (self.lo + o.lo, self.hi + o.hi);
        Interval::new(lower(lo, sum_err(self.lo, o.lo, lo)), upper(hi, sum_err(self.hi, o.hi, hi)))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        self + (-o)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in [self.lo, self.hi] {
            for y in [o.lo, o.hi] {
                let p = x * y;
                // 0 * inf products only arise from unbounded inputs
                if p.is_nan() {
                    continue;
                }
                let e = mul_err(x, y, p);
                lo = lo.min(lower(p, e));
                hi = hi.max(upper(p, e));
            }
        }
        Interval::new(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        if o.contains_zero() {
            return Interval::ENTIRE;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in [self.lo, self.hi] {
            for y in [o.lo, o.hi] {
                let q = x / y;
                // x - q y is exact; the error of q has its sign times sign(y)
                let r = mul_err(q, y, q * y);
                let e = if r.is_nan() || !q.is_finite() || q.abs() < 1e-290 {
                    f64::NAN
                } else {
                    let rem = (-q).mul_add(y, x);
                    rem * y.signum()
                };
                lo = lo.min(lower(q, e));
                hi = hi.max(upper(q, e));
            }
        }
        Interval::new(lo, hi)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, o: f64) -> Interval {
        self * Interval::point(o)
    }
}

/// Rectangular complex interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub const ZERO: CInterval = CInterval { re: Interval::ZERO, im: Interval::ZERO };
    pub const ONE: CInterval = CInterval { re: Interval::ONE, im: Interval::ZERO };

    pub fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    pub fn point(re: f64, im: f64) -> Self {
        CInterval { re: Interval::point(re), im: Interval::point(im) }
    }

    pub fn real(x: Interval) -> Self {
        CInterval { re: x, im: Interval::ZERO }
    }

    /// Box of radius `r` in both coordinates around `(re, im)`.
    pub fn around(re: f64, im: f64, r: f64) -> Self {
        CInterval { re: Interval::around(re, r), im: Interval::around(im, r) }
    }

    pub fn mid(&self) -> (f64, f64) {
        (self.re.mid(), self.im.mid())
    }

    pub fn conj(self) -> Self {
        CInterval { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> Interval {
        self.re.sqr() + self.im.sqr()
    }

    pub fn abs(self) -> Interval {
        self.norm_sqr().sqrt()
    }

    pub fn interior_of(&self, other: &CInterval) -> bool {
        self.re.interior_of(&other.re) && self.im.interior_of(&other.im)
    }

    pub fn intersects(&self, other: &CInterval) -> bool {
        self.re.intersects(&other.re) && self.im.intersects(&other.im)
    }

    pub fn contains(&self, re: f64, im: f64) -> bool {
        self.re.contains(re) && self.im.contains(im)
    }

    pub fn hull(&self, other: &CInterval) -> CInterval {
        CInterval { re: self.re.hull(&other.re), im: self.im.hull(&other.im) }
    }

    pub fn width(&self) -> f64 {
        self.re.width().max(self.im.width())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Range of the argument over the box, in `(-pi, pi]`. `None` if the box
    /// meets the closed negative real axis (where the principal branch jumps).
    pub fn arg(self) -> Option<Interval> {
        if self.im.contains_zero() && self.re.lo <= 0.0 {
            return None;
        }
        // the box is convex and misses the cut, so the extremes sit at corners
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in [self.re.lo, self.re.hi] {
            for y in [self.im.lo, self.im.hi] {
                let a = y.atan2(x);
                lo = lo.min(a);
                hi = hi.max(a);
            }
        }
        Some(Interval::new(down(lo, TRANSCENDENTAL_ULPS), up(hi, TRANSCENDENTAL_ULPS)))
    }

    /// Principal logarithm, `None` if the box meets the branch cut.
    pub fn ln(self) -> Option<CInterval> {
        let arg = self.arg()?;
        let modulus = self.norm_sqr().ln() * Interval::point(0.5);
        Some(CInterval { re: modulus, im: arg })
    }

    pub fn scale(self, k: Interval) -> CInterval {
        CInterval { re: self.re * k, im: self.im * k }
    }

    pub fn inflate(self, r: f64) -> CInterval {
        CInterval { re: self.re.inflate(r), im: self.im.inflate(r) }
    }

    pub fn recip(self) -> CInterval {
        let d = self.norm_sqr();
        CInterval { re: self.re / d, im: -self.im / d }
    }

    pub fn powi(self, n: u32) -> CInterval {
        let mut acc = CInterval::ONE;
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl fmt::Display for CInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {} i", self.re, self.im)
    }
}

impl Add for CInterval {
    type Output = CInterval;
    fn add(self, o: CInterval) -> CInterval {
        CInterval { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for CInterval {
    type Output = CInterval;
    fn sub(self, o: CInterval) -> CInterval {
        CInterval { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for CInterval {
    type Output = CInterval;
    fn neg(self) -> CInterval {
        CInterval { re: -self.re, im: -self.im }
    }
}

impl Mul for CInterval {
    type Output = CInterval;
    fn mul(self, o: CInterval) -> CInterval {
        CInterval { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Div for CInterval {
    type Output = CInterval;
    fn div(self, o: CInterval) -> CInterval {
        let d = o.norm_sqr();
        let n = self * o.conj();
        CInterval { re: n.re / d, im: n.im / d }
    }
}
