//! Floating-point filters with rigorous error bounds. They only ever decide a
//! comparison when the float gap is far larger than the accumulated error; all
//! other cases fall through to exact integer arithmetic.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

const PI_F64: f64 = std::f64::consts::PI;
/// Relative error budget per approximated ratio (generous: the true bound is about 2^-51).
const REL: f64 = 3.0e-15;
/// Absolute slack covering underflow of tiny terms.
const ABS: f64 = 1.0e-290;

/// `x ~ m * 2^e` with `m` holding the top 64 bits.
fn top(x: &BigInt) -> (f64, i64) {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_f64().unwrap_or(0.0), 0);
    }
    // The top two limbs hold at least 65 significant bits.
    let mut digits = x.magnitude().iter_u64_digits();
    let n = digits.len() as i64;
    let hi = digits.next_back().unwrap_or(0) as f64;
    let lo = digits.next_back().unwrap_or(0) as f64;
    let m = hi * 2f64.powi(64) + lo;
    let shift = 64 * (n - 2);
    (if x.is_negative() { -m } else { m }, shift)
}

fn ldexp(x: f64, e: i64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut v = x;
    let mut e = e.clamp(-4000, 4000);
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

/// Approximate `(a + b*pi)/d` as `(value, error bound)`; `None` when out of float range.
pub(crate) fn approx_linear(a: &BigInt, b: &BigInt, d: &BigInt) -> Option<(f64, f64)> {
    let (md, ed) = top(d);
    if md == 0.0 {
        return None;
    }
    let (ma, ea) = top(a);
    let ca = if a.is_zero() { 0.0 } else { ldexp(ma / md, ea - ed) };
    let cb = if b.is_zero() {
        0.0
    } else {
        let (mb, eb) = top(b);
        ldexp(mb / md, eb - ed)
    };
    let v = ca + cb * PI_F64;
    if !v.is_finite() || !ca.is_finite() || !cb.is_finite() {
        return None;
    }
    let err = (ca.abs() + 4.0 * cb.abs()) * REL + ABS;
    Some((v, err))
}

/// Decide the sign of `a + b*pi` by floats when that is unambiguous.
pub(crate) fn sign_linear_filter(a: &BigInt, b: &BigInt) -> Option<Ordering> {
    let (ma, ea) = top(a);
    let (mb, eb) = top(b);
    let e = ea.max(eb);
    let ca = if a.is_zero() { 0.0 } else { ldexp(ma, ea - e) };
    let cb = if b.is_zero() { 0.0 } else { ldexp(mb, eb - e) };
    let v = ca + cb * PI_F64;
    let err = (ca.abs() + 4.0 * cb.abs()) * REL + ABS;
    decide(v, err)
}

pub(crate) fn decide(v: f64, err: f64) -> Option<Ordering> {
    if !v.is_finite() {
        None
    } else if v > err {
        Some(Ordering::Greater)
    } else if v < -err {
        Some(Ordering::Less)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_operands_keep_ratio() {
        let big = num_traits::pow(BigInt::from(3u32), 5000);
        let a = &big * 2;
        let (v, err) = approx_linear(&a, &BigInt::zero(), &big).unwrap();
        assert!((v - 2.0).abs() <= err);
        let (v, err) = approx_linear(&BigInt::zero(), &big, &big).unwrap();
        assert!((v - PI_F64).abs() <= err);
    }

    #[test]
    fn filter_refuses_close_calls() {
        // 355 - 113*pi is about -3e-5: decided. 103993 - 33102*pi is about 1.9e-10 * 33102: decided.
        assert_eq!(sign_linear_filter(&BigInt::from(355), &BigInt::from(-113)), Some(Ordering::Greater));
        let p = BigInt::parse_bytes(b"245850922", 10).unwrap();
        let q = BigInt::parse_bytes(b"78256779", 10).unwrap();
        // |p - q*pi| ~ 3.2e-9 relative to 2.5e8: near the float error scale, must not lie.
        if let Some(o) = sign_linear_filter(&p, &-q.clone()) {
            assert_eq!(o, crate::exactnum::enclosure::sign_linear(&p, &-q).unwrap());
        }
    }
}
