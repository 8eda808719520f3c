//! Exact arithmetic in the field of rational functions of pi, with certified ordering.
//!
//! Almost every value the library touches has the form `(a + b*pi)/d`, so that shape
//! gets its own representation and fast paths. Anything else (products of two
//! pi-dependent values, quotients by them) falls back to a canonical quotient of
//! integer polynomials.
//!
//! Ordering is decided exactly: a float filter handles the clear cases, and the
//! remaining ones are settled against a stored decimal expansion of pi. If even the
//! whole digit budget cannot separate two values, the `try_` methods return
//! [`Error::PrecisionExhausted`] and the `Ord` impl panics.

mod approx;
mod enclosure;
mod pi_digits;
mod poly;
mod text;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use enclosure::{max_digits, set_max_digits, PiEnclosure, DIGITS_ENV, STORED_DIGITS};

use crate::error::{Error, Result};
use poly::RatPoly;

/// An element of Q(pi).
#[derive(Clone)]
pub struct PiRational(Repr);

#[derive(Clone)]
enum Repr {
    /// `(a + b*pi)/d` with `d > 0`. Common factors are removed whenever that is cheap;
    /// equality never relies on it.
    Lin { a: BigInt, b: BigInt, d: BigInt },
    /// Coprime integer polynomials in pi (ascending), unit content, positive leading
    /// denominator coefficient, and never expressible as `Lin`.
    Frac { num: Vec<BigInt>, den: Vec<BigInt> },
}

/// gcd when it can be had cheaply. num-bigint's gcd is quadratic, which dominates
/// tracing runs on thousand-digit operands, so large pairs are skipped.
/// `|x| mod m` by one pass over the limbs, without allocating.
fn rem_u64(x: &num_bigint::BigUint, m: u64) -> u64 {
    x.iter_u64_digits().rev().fold(0u64, |r, d| ((((r as u128) << 64) | d as u128) % m as u128) as u64)
}

fn gcd_cheap(x: &BigInt, y: &BigInt) -> Option<BigInt> {
    if x.is_zero() {
        return Some(y.abs());
    }
    if y.is_zero() {
        return Some(x.abs());
    }
    let (big, small) = if x.bits() >= y.bits() { (x, y) } else { (y, x) };
    if small.bits() <= 64 {
        let m = small.magnitude().iter_u64_digits().next().unwrap_or(0);
        return Some(BigInt::from(rem_u64(big.magnitude(), m).gcd(&m)));
    }
    if small.bits() <= 128 {
        return Some((big % small).gcd(small));
    }
    if big.bits() <= 512 {
        return Some(x.gcd(y));
    }
    None
}

fn lin(a: BigInt, b: BigInt, d: BigInt) -> PiRational {
    debug_assert!(!d.is_zero());
    let (mut a, mut b, mut d) = if d.is_negative() { (-a, -b, -d) } else { (a, b, d) };
    if a.is_zero() && b.is_zero() {
        return PiRational::zero();
    }
    if d.is_one() {
        return PiRational(Repr::Lin { a, b, d });
    }
    let g = if a.is_zero() {
        gcd_cheap(&d, &b)
    } else {
        gcd_cheap(&d, &a).and_then(|g| if b.is_zero() { Some(g) } else { gcd_cheap(&g, &b) })
    };
    if let Some(g) = g {
        if !g.is_one() {
            a /= &g;
            b /= &g;
            d /= &g;
        }
    }
    PiRational(Repr::Lin { a, b, d })
}

/// Divide `x` and `y` by their gcd when cheap.
fn cancel(x: &BigInt, y: &BigInt) -> (BigInt, BigInt) {
    match gcd_cheap(x, y) {
        Some(g) if !g.is_one() && !g.is_zero() => (x / &g, y / &g),
        _ => (x.clone(), y.clone()),
    }
}

impl PiRational {
    pub fn zero() -> Self {
        PiRational(Repr::Lin { a: BigInt::zero(), b: BigInt::zero(), d: BigInt::one() })
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        PiRational(Repr::Lin { a: n.into(), b: BigInt::zero(), d: BigInt::one() })
    }

    /// `n/d`; panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero divisor");
        lin(BigInt::from(n), BigInt::zero(), BigInt::from(d))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        lin(r.numer().clone(), BigInt::zero(), r.denom().clone())
    }

    pub fn pi() -> Self {
        PiRational(Repr::Lin { a: BigInt::zero(), b: BigInt::one(), d: BigInt::one() })
    }

    /// `constant + pi_coefficient * pi`.
    pub fn linear(constant: &BigRational, pi_coefficient: &BigRational) -> Self {
        let d = constant.denom().lcm(pi_coefficient.denom());
        let a = constant.numer() * (&d / constant.denom());
        let b = pi_coefficient.numer() * (&d / pi_coefficient.denom());
        lin(a, b, d)
    }

    /// The point `r + pi`.
    pub fn q_pi(r: &BigRational) -> Self {
        Self::linear(r, &BigRational::one())
    }

    /// `num(pi)/den(pi)` for ascending rational coefficient lists.
    pub fn from_polys(num: &[BigRational], den: &[BigRational]) -> Result<Self> {
        let mut d = den.to_vec();
        poly::trim(&mut d);
        if d.is_empty() {
            return Err(Error::ZeroDivisor);
        }
        Ok(Self::from_rat_polys(num.to_vec(), d))
    }

    fn from_rat_polys(num: RatPoly, den: RatPoly) -> Self {
        let (n, d) = poly::canonical_pair(&num, &den);
        if d.len() == 1 && n.len() <= 2 {
            let mut it = n.into_iter();
            let a = it.next().unwrap_or_else(BigInt::zero);
            let b = it.next().unwrap_or_else(BigInt::zero);
            PiRational(Repr::Lin { a, b, d: d.into_iter().next().unwrap() })
        } else {
            PiRational(Repr::Frac { num: n, den: d })
        }
    }

    fn rat_polys(&self) -> (RatPoly, RatPoly) {
        match &self.0 {
            Repr::Lin { a, b, d } => (poly::from_ints(&[a.clone(), b.clone()]), poly::from_ints(std::slice::from_ref(d))),
            Repr::Frac { num, den } => (poly::from_ints(num), poly::from_ints(den)),
        }
    }

    /// Canonical numerator and denominator polynomials (ascending integer coefficients).
    pub fn polynomials(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        match &self.0 {
            Repr::Lin { .. } => {
                let (n, d) = self.rat_polys();
                poly::canonical_pair(&n, &d)
            }
            Repr::Frac { num, den } => (num.clone(), den.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Lin { a, b, .. } if a.is_zero() && b.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        matches!(&self.0, Repr::Lin { b, .. } if b.is_zero())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        match &self.0 {
            Repr::Lin { a, b, d } if b.is_zero() => Some(BigRational::new(a.clone(), d.clone())),
            _ => None,
        }
    }

    /// `(constant, pi coefficient)` when the value is affine in pi.
    pub fn linear_parts(&self) -> Option<(BigRational, BigRational)> {
        match &self.0 {
            Repr::Lin { a, b, d } => {
                Some((BigRational::new(a.clone(), d.clone()), BigRational::new(b.clone(), d.clone())))
            }
            Repr::Frac { .. } => None,
        }
    }

    pub fn pi_coefficient(&self) -> Option<BigRational> {
        self.linear_parts().map(|(_, k)| k)
    }

    /// Whether the value lies in the coset `Q + pi`.
    pub fn in_q_pi(&self) -> bool {
        matches!(&self.0, Repr::Lin { b, d, .. } if b == d)
    }

    /// Rough size of the representation in bits, for diagnostics.
    pub fn size_bits(&self) -> u64 {
        match &self.0 {
            Repr::Lin { a, b, d } => a.bits().max(b.bits()).max(d.bits()),
            Repr::Frac { num, den } => num.iter().chain(den).map(|c| c.bits()).max().unwrap_or(0),
        }
    }

    /// Nearest-ish float; only for rendering.
    pub fn to_f64(&self) -> f64 {
        if let Repr::Lin { a, b, d } = &self.0 {
            if let Some((v, e)) = approx::approx_linear(a, b, d) {
                if e <= v.abs() * 1e-12 {
                    return v;
                }
            }
            // Cancellation between the two terms: read off the value at 2^-80 resolution.
            if !b.is_zero() {
                let shift = BigInt::one() << 80u32;
                if let Ok(f) = enclosure::floor_linear(&(a * &shift), &(b * &shift), d) {
                    return BigRational::new(f, shift).to_f64().unwrap_or(f64::NAN);
                }
            }
        }
        self.rough_rational(1).to_f64().unwrap_or(f64::NAN)
    }

    /// A rational within about `10^-(20*2^level)` relative of the value.
    fn rough_rational(&self, level: usize) -> BigRational {
        let (n, d) = self.polynomials();
        let (nl, nh) = enclosure::poly_value_bounds(&n, level).expect("level 0 and 1 always usable");
        let (dl, dh) = enclosure::poly_value_bounds(&d, level).expect("level 0 and 1 always usable");
        let two = BigRational::from_integer(BigInt::from(2));
        let nm = (nl + nh) / &two;
        let dm = (dl + dh) / &two;
        if dm.is_zero() {
            nm
        } else {
            nm / dm
        }
    }

    fn approx(&self) -> Option<(f64, f64)> {
        match &self.0 {
            Repr::Lin { a, b, d } => approx::approx_linear(a, b, d),
            Repr::Frac { .. } => None,
        }
    }

    /// Sign of the value.
    pub fn try_sign(&self) -> Result<Ordering> {
        match &self.0 {
            Repr::Lin { a, b, .. } => enclosure::sign_linear(a, b),
            Repr::Frac { num, den } => {
                let s = enclosure::sign_poly(num)?;
                Ok(if enclosure::sign_poly(den)? == Ordering::Less { s.reverse() } else { s })
            }
        }
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        if let (Repr::Lin { a: a1, b: b1, d: d1 }, Repr::Lin { a: a2, b: b2, d: d2 }) = (&self.0, &other.0) {
            if a1 == a2 && b1 == b2 && d1 == d2 {
                return Ok(Ordering::Equal);
            }
            if let (Some((v1, e1)), Some((v2, e2))) = (self.approx(), other.approx()) {
                let slack = e1 + e2 + (v1.abs() + v2.abs()) * 1e-15;
                if let Some(o) = approx::decide(v1 - v2, slack) {
                    return Ok(o);
                }
            }
            let (a, b) = if d1 == d2 {
                (a1 - a2, b1 - b2)
            } else {
                (a1 * d2 - a2 * d1, b1 * d2 - b2 * d1)
            };
            return enclosure::sign_linear(&a, &b);
        }
        (self - other).try_sign()
    }

    /// Compare with an integer.
    fn cmp_integer(&self, k: &BigInt) -> Result<Ordering> {
        match &self.0 {
            Repr::Lin { a, b, d } => enclosure::sign_linear(&(a - k * d), b),
            Repr::Frac { .. } => self.try_cmp(&PiRational::integer(k.clone())),
        }
    }

    pub fn try_floor(&self) -> Result<BigInt> {
        if let Repr::Lin { a, b, d } = &self.0 {
            if b.is_zero() {
                return Ok(a.div_floor(d));
            }
        }
        if let Some((v, e)) = self.approx() {
            if v.abs() < 1e15 {
                let lo = (v - 2.0 * e).floor();
                let hi = (v + 2.0 * e).floor();
                if lo == hi {
                    return Ok(BigInt::from(lo as i64));
                }
            }
        }
        if let Repr::Lin { a, b, d } = &self.0 {
            return enclosure::floor_linear(a, b, d);
        }
        let mut k = self.rough_rational(1).floor().to_integer();
        loop {
            if self.cmp_integer(&k)? == Ordering::Less {
                k -= 1;
                continue;
            }
            let next = &k + 1;
            if self.cmp_integer(&next)? != Ordering::Less {
                k = next;
                continue;
            }
            return Ok(k);
        }
    }

    /// Greatest integer not above the value; panics if the digit budget runs out.
    pub fn floor(&self) -> BigInt {
        self.try_floor().unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_mod1(&self) -> Result<Self> {
        let k = self.try_floor()?;
        Ok(match &self.0 {
            Repr::Lin { a, b, d } => PiRational(Repr::Lin { a: a - &k * d, b: b.clone(), d: d.clone() }),
            Repr::Frac { .. } => self - &PiRational::integer(k),
        })
    }

    /// Reduction into `[0, 1)`; panics if the digit budget runs out.
    pub fn mod1(&self) -> Self {
        self.try_mod1().unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn abs(&self) -> Self {
        if self.try_sign().unwrap_or_else(|e| panic!("{e}")) == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    fn sign(&self) -> Ordering {
        self.try_sign().unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        if let (Repr::Lin { a: a1, b: b1, d: d1 }, Repr::Lin { a: a2, b: b2, d: d2 }) = (&self.0, &other.0) {
            if b2.is_zero() {
                return Ok(scale_lin(a1, b1, d1, d2, a2));
            }
            // Proportional numerators give a rational quotient.
            if a1 * b2 == a2 * b1 {
                if b1.is_zero() {
                    return Ok(PiRational::zero());
                }
                return Ok(lin(b1 * d2, BigInt::zero(), b2 * d1));
            }
        }
        let (n1, e1) = self.rat_polys();
        let (n2, e2) = other.rat_polys();
        Ok(Self::from_rat_polys(poly::mul(&n1, &e2), poly::mul(&e1, &n2)))
    }

    pub fn recip(&self) -> Result<Self> {
        PiRational::one().checked_div(self)
    }

    /// `(self + other)/2`.
    pub fn midpoint(&self, other: &Self) -> Self {
        (self + other).half()
    }

    pub fn half(&self) -> Self {
        match &self.0 {
            Repr::Lin { a, b, d } => scale_lin(a, b, d, &BigInt::one(), &BigInt::from(2)),
            Repr::Frac { .. } => self / &PiRational::integer(2),
        }
    }

    /// Multiply by the rational `p/q`.
    pub fn scale(&self, p: &BigInt, q: &BigInt) -> Self {
        assert!(!q.is_zero(), "zero divisor");
        match &self.0 {
            Repr::Lin { a, b, d } => scale_lin(a, b, d, p, q),
            Repr::Frac { .. } => self * &lin(p.clone(), BigInt::zero(), q.clone()),
        }
    }
}

/// `(a + b pi)/d * p/q`, cancelling cheap common factors first.
fn scale_lin(a: &BigInt, b: &BigInt, d: &BigInt, p: &BigInt, q: &BigInt) -> PiRational {
    assert!(!q.is_zero(), "zero divisor");
    if p.is_zero() || (a.is_zero() && b.is_zero()) {
        return PiRational::zero();
    }
    let (p, d) = cancel(p, d);
    let g = if a.is_zero() {
        gcd_cheap(q, b)
    } else {
        gcd_cheap(q, a).and_then(|g| if b.is_zero() { Some(g) } else { gcd_cheap(&g, b) })
    };
    let (q, a, b) = match g {
        Some(g) if !g.is_one() && !g.is_zero() => (q / &g, a / &g, b / &g),
        _ => (q.clone(), a.clone(), b.clone()),
    };
    let (mut na, mut nb, mut nd) = (a * &p, b * &p, d * &q);
    if nd.is_negative() {
        na = -na;
        nb = -nb;
        nd = -nd;
    }
    PiRational(Repr::Lin { a: na, b: nb, d: nd })
}

fn add_lin(a1: &BigInt, b1: &BigInt, d1: &BigInt, a2: &BigInt, b2: &BigInt, d2: &BigInt) -> PiRational {
    if d1 == d2 {
        return lin(a1 + a2, b1 + b2, d1.clone());
    }
    match gcd_cheap(d1, d2) {
        Some(g) if !g.is_one() => {
            let m1 = d2 / &g;
            let m2 = d1 / &g;
            lin(a1 * &m1 + a2 * &m2, b1 * &m1 + b2 * &m2, d1 * &m1)
        }
        _ => lin(a1 * d2 + a2 * d1, b1 * d2 + b2 * d1, d1 * d2),
    }
}

impl<'a> Add<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    fn add(self, rhs: &PiRational) -> PiRational {
        if let (Repr::Lin { a: a1, b: b1, d: d1 }, Repr::Lin { a: a2, b: b2, d: d2 }) = (&self.0, &rhs.0) {
            return add_lin(a1, b1, d1, a2, b2, d2);
        }
        let (n1, e1) = self.rat_polys();
        let (n2, e2) = rhs.rat_polys();
        let num = poly::add(&poly::mul(&n1, &e2), &poly::mul(&n2, &e1));
        PiRational::from_rat_polys(num, poly::mul(&e1, &e2))
    }
}

impl<'a> Sub<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    fn sub(self, rhs: &PiRational) -> PiRational {
        if let (Repr::Lin { a: a1, b: b1, d: d1 }, Repr::Lin { a: a2, b: b2, d: d2 }) = (&self.0, &rhs.0) {
            return add_lin(a1, b1, d1, &-a2, &-b2, d2);
        }
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    fn mul(self, rhs: &PiRational) -> PiRational {
        if let (Repr::Lin { a: a1, b: b1, d: d1 }, Repr::Lin { a: a2, b: b2, d: d2 }) = (&self.0, &rhs.0) {
            if b2.is_zero() {
                return scale_lin(a1, b1, d1, a2, d2);
            }
            if b1.is_zero() {
                return scale_lin(a2, b2, d2, a1, d1);
            }
        }
        let (n1, e1) = self.rat_polys();
        let (n2, e2) = rhs.rat_polys();
        PiRational::from_rat_polys(poly::mul(&n1, &n2), poly::mul(&e1, &e2))
    }
}

impl<'a> Div<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    /// Panics on a zero divisor; see [`PiRational::checked_div`].
    fn div(self, rhs: &PiRational) -> PiRational {
        self.checked_div(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &PiRational {
    type Output = PiRational;
    fn neg(self) -> PiRational {
        match &self.0 {
            Repr::Lin { a, b, d } => PiRational(Repr::Lin { a: -a, b: -b, d: d.clone() }),
            Repr::Frac { num, den } => PiRational(Repr::Frac { num: num.iter().map(|c| -c).collect(), den: den.clone() }),
        }
    }
}

impl Neg for PiRational {
    type Output = PiRational;
    fn neg(self) -> PiRational {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<PiRational> for PiRational {
            type Output = PiRational;
            fn $m(self, rhs: PiRational) -> PiRational {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a PiRational> for PiRational {
            type Output = PiRational;
            fn $m(self, rhs: &PiRational) -> PiRational {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<PiRational> for &'a PiRational {
            type Output = PiRational;
            fn $m(self, rhs: PiRational) -> PiRational {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&PiRational> for PiRational {
    fn add_assign(&mut self, rhs: &PiRational) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&PiRational> for PiRational {
    fn sub_assign(&mut self, rhs: &PiRational) {
        *self = &*self - rhs;
    }
}

impl PartialEq for PiRational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Lin { a: a1, b: b1, d: d1 }, Repr::Lin { a: a2, b: b2, d: d2 }) => {
                if a1 == a2 && b1 == b2 && d1 == d2 {
                    return true;
                }
                if b1.is_zero() != b2.is_zero() || a1.is_zero() != a2.is_zero() || a1.sign() != a2.sign() || b1.sign() != b2.sign() {
                    return false;
                }
                if let (Some((v1, e1)), Some((v2, e2))) = (self.approx(), other.approx()) {
                    if (v1 - v2).abs() > 2.0 * (e1 + e2) {
                        return false;
                    }
                }
                a1 * d2 == a2 * d1 && b1 * d2 == b2 * d1
            }
            (Repr::Frac { num: n1, den: e1 }, Repr::Frac { num: n2, den: e2 }) => n1 == n2 && e1 == e2,
            _ => false,
        }
    }
}

impl Eq for PiRational {}

impl PartialOrd for PiRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PiRational {
    /// Panics if the digit budget cannot separate the values; see [`PiRational::try_cmp`].
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl From<i64> for PiRational {
    fn from(n: i64) -> Self {
        PiRational::integer(n)
    }
}

impl From<BigInt> for PiRational {
    fn from(n: BigInt) -> Self {
        PiRational::integer(n)
    }
}

impl From<BigRational> for PiRational {
    fn from(r: BigRational) -> Self {
        PiRational::from_rational(&r)
    }
}

impl From<&BigRational> for PiRational {
    fn from(r: &BigRational) -> Self {
        PiRational::from_rational(r)
    }
}

impl Default for PiRational {
    fn default() -> Self {
        PiRational::zero()
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format(self))
    }
}

impl fmt::Debug for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = text::format(self);
        if s.len() > 120 {
            write!(f, "{}…[{} chars] (~{})", &s[..60], s.len(), self.to_f64())
        } else {
            f.write_str(&s)
        }
    }
}

impl FromStr for PiRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        text::parse(s)
    }
}
