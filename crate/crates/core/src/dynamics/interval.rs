//! Closed real intervals with range-exact elementary operations.
//!
//! Bounds are computed in ordinary floating point; results are exact ranges of
//! the operations up to round-off, which is far below every tolerance used in
//! this crate.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInput(format!("interval bounds out of order: [{lo}, {hi}]")))
        }
    }

    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub const ZERO: Interval = Interval::point(0.0);

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// max(|lo|, |hi|)
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval { lo: k * self.lo, hi: k * self.hi }
        } else {
            Interval { lo: k * self.hi, hi: k * self.lo }
        }
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    /// x², tighter than `x * x` when the interval straddles zero.
    pub fn sqr(self) -> Interval {
        let a = self.abs();
        Interval { lo: a.lo * a.lo, hi: a.hi * a.hi }
    }

    pub fn sqrt(self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(Error::Domain(format!("sqrt of {self}")));
        }
        Ok(Interval { lo: self.lo.sqrt(), hi: self.hi.sqrt() })
    }

    pub fn recip(self) -> Result<Interval> {
        if self.contains(0.0) {
            return Err(Error::Domain(format!("reciprocal of {self}")));
        }
        Ok(Interval { lo: 1.0 / self.hi, hi: 1.0 / self.lo })
    }

    /// `x^p` for `x > 0` (monotone in x for any fixed real p).
    pub fn powf_pos(self, p: f64) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::Domain(format!("power {p} of {self}")));
        }
        let (a, b) = (self.lo.powf(p), self.hi.powf(p));
        Ok(Interval { lo: a.min(b), hi: a.max(b) })
    }

    /// Range of `sin`, using the critical points `π/2 + kπ` inside the interval.
    pub fn sin(self) -> Interval {
        self.trig(f64::sin, FRAC_PI_2)
    }

    /// Range of `cos`, using the critical points `kπ` inside the interval.
    pub fn cos(self) -> Interval {
        self.trig(f64::cos, 0.0)
    }

    fn trig(self, f: fn(f64) -> f64, first_peak: f64) -> Interval {
        if self.width() >= 2.0 * PI {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let (a, b) = (f(self.lo), f(self.hi));
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        // Extrema sit at first_peak + kπ; even k is a maximum, odd k a minimum.
        let k0 = ((self.lo - first_peak) / PI).ceil() as i64;
        let mut k = k0;
        loop {
            let t = first_peak + k as f64 * PI;
            if t > self.hi {
                break;
            }
            if k.rem_euclid(2) == 0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
            k += 1;
        }
        Interval { lo, hi }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval {
            lo: p.iter().copied().fold(f64::INFINITY, f64::min),
            hi: p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, k: f64) -> Interval {
        self.scale(k)
    }
}

/// Dense square matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    n: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(n: usize) -> Self {
        IntervalMatrix { n, data: vec![Interval::ZERO; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.n + j] = v;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: Interval) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn contains(&self, m: &nalgebra::DMatrix<f64>, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let iv = self.get(i, j);
                m[(i, j)] >= iv.lo - tol && m[(i, j)] <= iv.hi + tol
            })
        })
    }

    /// Interval enclosure of `½ dᵀ H d` for `d` ranging over the box `d`.
    pub fn half_quadratic_form(&self, d: &[Interval]) -> Interval {
        let mut acc = Interval::ZERO;
        for i in 0..self.n {
            let hii = self.get(i, i);
            if hii != Interval::ZERO {
                acc = acc + hii * d[i].sqr() * 0.5;
            }
            for j in (i + 1)..self.n {
                let hij = self.get(i, j);
                let hji = self.get(j, i);
                if hij == Interval::ZERO && hji == Interval::ZERO {
                    continue;
                }
                // ½ (h_ij + h_ji) d_i d_j
                acc = acc + (hij + hji) * (d[i] * d[j]) * 0.5;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn addition() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
    }

    #[test]
    fn sine_over_half_turn() {
        let s = iv(0.0, PI).sin();
        assert!(s.lo.abs() < 1e-15 && s.lo <= 0.0 + 1e-15);
        assert_eq!(s.hi, 1.0);
    }

    #[test]
    fn square_root() {
        assert_eq!(iv(4.0, 9.0).sqrt().unwrap(), iv(2.0, 3.0));
        assert!(iv(-1.0, 1.0).sqrt().is_err());
    }

    #[test]
    fn cosine_peaks() {
        assert_eq!(iv(-0.1, 0.1).cos().hi, 1.0);
        assert_eq!(iv(3.0, 3.3).cos().lo, -1.0);
        let c = iv(0.5, 1.0).cos();
        assert_eq!((c.lo, c.hi), (1.0f64.cos(), 0.5f64.cos()));
    }

    #[test]
    fn quadratic_form_bounds() {
        let mut h = IntervalMatrix::zeros(2);
        h.set(0, 0, iv(2.0, 2.0));
        h.set_sym(0, 1, iv(-1.0, 1.0));
        let d = [iv(-0.5, 0.5), iv(-0.5, 0.5)];
        let q = h.half_quadratic_form(&d);
        // ½·2·[0, .25] + [-1,1]·[-.25,.25]
        assert!((q.lo + 0.25).abs() < 1e-15 && (q.hi - 0.5).abs() < 1e-15);
    }

    fn interval_strategy() -> impl Strategy<Value = Interval> {
        (-5.0..5.0f64, 0.0..4.0f64).prop_map(|(lo, w)| Interval { lo, hi: lo + w })
    }

    fn pick(x: Interval, t: f64) -> f64 {
        x.lo + t * (x.hi - x.lo)
    }

    proptest! {
        #[test]
        fn fundamental_theorem(a in interval_strategy(), b in interval_strategy(),
                               s in 0.0..=1.0f64, t in 0.0..=1.0f64, k in -3.0..3.0f64) {
            let (x, y) = (pick(a, s), pick(b, t));
            let eps = 1e-12;
            let inside = |r: Interval, v: f64| r.lo - eps <= v && v <= r.hi + eps;
            prop_assert!(inside(a + b, x + y));
            prop_assert!(inside(a - b, x - y));
            prop_assert!(inside(a * b, x * y));
            prop_assert!(inside(a.scale(k), k * x));
            prop_assert!(inside(a.sin(), x.sin()));
            prop_assert!(inside(a.cos(), x.cos()));
            prop_assert!(inside(a.abs(), x.abs()));
            prop_assert!(inside(a.sqr(), x * x));
            let pos = Interval { lo: a.lo.abs() + 0.01, hi: a.lo.abs() + 0.01 + a.width() };
            let xp = pick(pos, s);
            prop_assert!(inside(pos.sqrt().unwrap(), xp.sqrt()));
            prop_assert!(inside(pos.powf_pos(-1.5).unwrap(), xp.powf(-1.5)));
        }
    }
}
