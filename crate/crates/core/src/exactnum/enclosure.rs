//! Certified rational brackets around pi, read off a stored decimal expansion.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::pi_digits::PI_DIGITS;
use crate::error::{Error, Result};

/// Number of fractional digits stored in the table.
pub const STORED_DIGITS: usize = 10_000;

/// Digits used by the first refinement level.
const FIRST_LEVEL: usize = 20;

/// Environment variable that caps how many digits comparisons may consume.
pub const DIGITS_ENV: &str = "PWSHADOW_PI_DIGITS";

static BUDGET: AtomicUsize = AtomicUsize::new(0);
static FINEST: AtomicUsize = AtomicUsize::new(FIRST_LEVEL);

pub(crate) struct Level {
    pub digits: usize,
    /// floor(pi * 10^digits)
    pub floor: BigInt,
    /// 10^digits
    pub scale: BigInt,
}

fn levels() -> &'static [Level] {
    static LEVELS: OnceLock<Vec<Level>> = OnceLock::new();
    LEVELS.get_or_init(|| {
        let mut out = Vec::new();
        let mut k = FIRST_LEVEL;
        loop {
            let k_eff = k.min(STORED_DIGITS);
            let floor: BigInt = PI_DIGITS[..=k_eff].parse().expect("digit table is numeric");
            let scale = num_traits::pow(BigInt::from(10u32), k_eff);
            out.push(Level { digits: k_eff, floor, scale });
            if k_eff == STORED_DIGITS {
                break;
            }
            k *= 2;
        }
        out
    })
}

/// Current cap on digits used by comparisons.
pub fn max_digits() -> usize {
    let b = BUDGET.load(AtomicOrdering::Relaxed);
    if b != 0 {
        return b;
    }
    let from_env = std::env::var(DIGITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(STORED_DIGITS)
        .clamp(64, STORED_DIGITS);
    BUDGET.store(from_env, AtomicOrdering::Relaxed);
    from_env
}

/// Override the digit cap (clamped to `64..=STORED_DIGITS`).
pub fn set_max_digits(digits: usize) {
    BUDGET.store(digits.clamp(64, STORED_DIGITS), AtomicOrdering::Relaxed);
}

pub(crate) fn usable_levels() -> impl Iterator<Item = &'static Level> {
    let cap = max_digits();
    levels().iter().filter(move |l| l.digits <= cap || l.digits == FIRST_LEVEL)
}

fn note_refinement(digits: usize) {
    FINEST.fetch_max(digits, AtomicOrdering::Relaxed);
}

/// A rational interval `lower < pi < upper`.
#[derive(Clone, Debug)]
pub struct PiEnclosure {
    pub lower: BigRational,
    pub upper: BigRational,
    digits: usize,
}

impl PiEnclosure {
    /// Bracket from the first `digits` fractional digits.
    pub fn with_digits(digits: usize) -> Result<Self> {
        if digits > STORED_DIGITS.min(max_digits()) {
            return Err(Error::PrecisionExhausted { digits: max_digits() });
        }
        let floor: BigInt = PI_DIGITS[..=digits].parse().expect("digit table is numeric");
        let scale = num_traits::pow(BigInt::from(10u32), digits);
        let lower = BigRational::new(floor.clone(), scale.clone());
        let upper = BigRational::new(floor + 1, scale);
        note_refinement(digits);
        Ok(PiEnclosure { lower, upper, digits })
    }

    /// The finest enclosure any comparison has needed so far.
    pub fn shared() -> Self {
        Self::with_digits(FINEST.load(AtomicOrdering::Relaxed)).expect("recorded level is within budget")
    }

    /// Halve the width until it is at most `width`, or fail at the digit cap.
    pub fn refine_to_width(&self, width: &BigRational) -> Result<Self> {
        let mut cur = self.clone();
        while &(&cur.upper - &cur.lower) > width {
            cur = cur.halve()?;
        }
        Ok(cur)
    }

    /// Split at the midpoint and keep the half that still contains pi.
    pub fn halve(&self) -> Result<Self> {
        let mid = (&self.lower + &self.upper) / BigRational::from_integer(BigInt::from(2));
        // sign of mid - pi = sign(numer - denom*pi) / denom
        let side = sign_linear(mid.numer(), &-mid.denom())?;
        let (lower, upper) = match side {
            Ordering::Greater => (self.lower.clone(), mid),
            _ => (mid, self.upper.clone()),
        };
        Ok(PiEnclosure { lower, upper, digits: self.digits })
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }
}

/// Sign of `a + b*pi` for integers `a`, `b`.
pub(crate) fn sign_linear(a: &BigInt, b: &BigInt) -> Result<Ordering> {
    if b.is_zero() {
        return Ok(a.sign_ordering());
    }
    if let Some(o) = super::approx::sign_linear_filter(a, b) {
        return Ok(o);
    }
    for level in usable_levels() {
        // a*10^k + b*floor(pi*10^k) and the same with floor+1 bracket (a + b*pi)*10^k.
        let lo = a * &level.scale + b * &level.floor;
        let hi = &lo + b;
        let (min, max) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        if !min.is_negative() {
            note_refinement(level.digits);
            return Ok(Ordering::Greater);
        }
        if !max.is_positive() {
            note_refinement(level.digits);
            return Ok(Ordering::Less);
        }
    }
    Err(Error::PrecisionExhausted { digits: max_digits() })
}

/// `floor((a + b*pi) / d)` for `b != 0` and `d > 0`.
pub(crate) fn floor_linear(a: &BigInt, b: &BigInt, d: &BigInt) -> Result<BigInt> {
    use num_integer::Integer;
    for level in usable_levels() {
        // The value lies strictly between lo/den and hi/den.
        let lo = a * &level.scale + b * &level.floor;
        let hi = &lo + b;
        let (min, max) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let den = d * &level.scale;
        let f = min.div_floor(&den);
        if (&f + 1) * &den >= max {
            note_refinement(level.digits);
            return Ok(f);
        }
    }
    Err(Error::PrecisionExhausted { digits: max_digits() })
}

/// Sign of `p(pi)` for an integer polynomial (ascending coefficients).
pub(crate) fn sign_poly(p: &[BigInt]) -> Result<Ordering> {
    match p.len() {
        0 => return Ok(Ordering::Equal),
        1 => return Ok(p[0].sign_ordering()),
        2 => return sign_linear(&p[0], &p[1]),
        _ => {}
    }
    for level in usable_levels() {
        let (lo, hi) = poly_bounds(p, level);
        if lo.is_positive() {
            note_refinement(level.digits);
            return Ok(Ordering::Greater);
        }
        if hi.is_negative() {
            note_refinement(level.digits);
            return Ok(Ordering::Less);
        }
    }
    Err(Error::PrecisionExhausted { digits: max_digits() })
}

/// Bounds on `p(pi) * 10^(k*deg)` using `floor/10^k < pi < (floor+1)/10^k`.
fn poly_bounds(p: &[BigInt], level: &Level) -> (BigInt, BigInt) {
    let Some(n) = p.len().checked_sub(1) else {
        return (BigInt::zero(), BigInt::zero());
    };
    let lo_pi = &level.floor;
    let hi_pi = &level.floor + 1;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut pow_lo = BigInt::one();
    let mut pow_hi = BigInt::one();
    for (j, c) in p.iter().enumerate() {
        if !c.is_zero() {
            let rest = num_traits::pow(level.scale.clone(), n - j);
            let t_lo = c * &pow_lo * &rest;
            let t_hi = c * &pow_hi * &rest;
            if c.is_positive() {
                lo += t_lo;
                hi += t_hi;
            } else {
                lo += t_hi;
                hi += t_lo;
            }
        }
        pow_lo *= lo_pi;
        pow_hi *= &hi_pi;
    }
    (lo, hi)
}

/// Rational bounds `lower < p(pi) < upper` at a given refinement index, used for floors.
pub(crate) fn poly_value_bounds(p: &[BigInt], level_index: usize) -> Option<(BigRational, BigRational)> {
    let level = usable_levels().nth(level_index)?;
    let n = p.len().saturating_sub(1);
    let (lo, hi) = poly_bounds(p, level);
    let denom = num_traits::pow(level.scale.clone(), n);
    Some((BigRational::new(lo, denom.clone()), BigRational::new(hi, denom)))
}

trait SignOrdering {
    fn sign_ordering(&self) -> Ordering;
}

impl SignOrdering for BigInt {
    fn sign_ordering(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent pi via Machin's formula in scaled integer arithmetic.
    fn machin_digits(k: usize) -> BigInt {
        let guard = 10;
        let scale = num_traits::pow(BigInt::from(10u32), k + guard);
        let arctan_inv = |x: u32| -> BigInt {
            let x2 = BigInt::from(x * x);
            let mut term = &scale / BigInt::from(x);
            let mut sum = term.clone();
            let mut n = 1u32;
            loop {
                term = &term / &x2;
                if term.is_zero() {
                    break;
                }
                let t = &term / BigInt::from(2 * n + 1);
                if n % 2 == 1 {
                    sum -= t;
                } else {
                    sum += t;
                }
                n += 1;
            }
            sum
        };
        let pi = (arctan_inv(5) * 16) - (arctan_inv(239) * 4);
        pi / num_traits::pow(BigInt::from(10u32), guard)
    }

    #[test]
    fn stored_digits_agree_with_machin() {
        let k = 2000;
        let stored: BigInt = PI_DIGITS[..=k].parse().unwrap();
        let machin = machin_digits(k);
        // Machin truncation may be off by a unit in the last place.
        assert!((&stored - &machin).abs() <= BigInt::one());
        assert_eq!(PI_DIGITS.len(), STORED_DIGITS + 1);
    }

    #[test]
    fn enclosure_brackets_pi() {
        let e = PiEnclosure::with_digits(64).unwrap();
        assert!(e.lower < e.upper);
        let approx = BigRational::new(BigInt::from(355), BigInt::from(113));
        assert!(e.upper < approx);
        let halved = e.halve().unwrap();
        assert!(halved.width() < e.width());
        assert!(halved.lower >= e.lower && halved.upper <= e.upper);
    }

    #[test]
    fn linear_sign() {
        // 22 - 7 pi < 0 and 333 - 106 pi < 0 (333/106 < pi), 355 - 113 pi < 0
        assert_eq!(sign_linear(&BigInt::from(22), &BigInt::from(-7)).unwrap(), Ordering::Greater);
        assert_eq!(sign_linear(&BigInt::from(333), &BigInt::from(-106)).unwrap(), Ordering::Less);
        assert_eq!(sign_linear(&BigInt::from(-355), &BigInt::from(113)).unwrap(), Ordering::Less);
    }
}
