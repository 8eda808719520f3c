//! Dense univariate polynomials over the rationals, ascending coefficients.
//! Only the slow general path of the field type goes through here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type RatPoly = Vec<BigRational>;

pub(crate) fn trim(p: &mut RatPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub(crate) fn from_ints(p: &[BigInt]) -> RatPoly {
    let mut out: RatPoly = p.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    trim(&mut out);
    out
}

pub(crate) fn add(p: &RatPoly, q: &RatPoly) -> RatPoly {
    let n = p.len().max(q.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = p.get(i).cloned().unwrap_or_else(BigRational::zero);
        let b = q.get(i).cloned().unwrap_or_else(BigRational::zero);
        out.push(a + b);
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(p: &RatPoly, q: &RatPoly) -> RatPoly {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    trim(&mut out);
    out
}

pub(crate) fn scale(p: &RatPoly, c: &BigRational) -> RatPoly {
    let mut out: RatPoly = p.iter().map(|x| x * c).collect();
    trim(&mut out);
    out
}

/// Euclidean division; `q` must be nonzero.
pub(crate) fn divrem(p: &RatPoly, q: &RatPoly) -> (RatPoly, RatPoly) {
    let lead = q.last().expect("nonzero divisor");
    let mut rem = p.clone();
    trim(&mut rem);
    if rem.len() < q.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - q.len() + 1];
    while rem.len() >= q.len() && !rem.is_empty() {
        let shift = rem.len() - q.len();
        let c = rem.last().unwrap() / lead;
        for (j, b) in q.iter().enumerate() {
            rem[shift + j] -= &c * b;
        }
        quot[shift] = c;
        // The leading term cancels exactly.
        rem.pop();
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

/// Monic greatest common divisor.
pub(crate) fn gcd(p: &RatPoly, q: &RatPoly) -> RatPoly {
    let mut a = p.clone();
    let mut b = q.clone();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(l) = a.last().cloned() {
        a = scale(&a, &l.recip());
    }
    a
}

/// Reduce `num/den` to coprime integer polynomials with positive leading denominator
/// coefficient and unit content.
pub(crate) fn canonical_pair(num: &RatPoly, den: &RatPoly) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut num = num.clone();
    let mut den = den.clone();
    trim(&mut num);
    trim(&mut den);
    assert!(!den.is_empty(), "zero denominator polynomial");
    if num.is_empty() {
        return (Vec::new(), vec![BigInt::one()]);
    }
    let g = gcd(&num, &den);
    if g.len() > 1 {
        num = divrem(&num, &g).0;
        den = divrem(&den, &g).0;
    }
    let mut l = BigInt::one();
    for c in num.iter().chain(den.iter()) {
        l = l.lcm(c.denom());
    }
    let to_int = |c: &BigRational| (c * BigRational::from_integer(l.clone())).to_integer();
    let mut ni: Vec<BigInt> = num.iter().map(to_int).collect();
    let mut di: Vec<BigInt> = den.iter().map(to_int).collect();
    let mut content = BigInt::zero();
    for c in ni.iter().chain(di.iter()) {
        content = content.gcd(c);
    }
    if di.last().unwrap().is_negative() {
        content = -content;
    }
    for c in ni.iter_mut().chain(di.iter_mut()) {
        *c /= &content;
    }
    (ni, di)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> RatPoly {
        let v: Vec<BigInt> = cs.iter().map(|&c| BigInt::from(c)).collect();
        from_ints(&v)
    }

    #[test]
    fn division_identity() {
        let a = p(&[1, 0, -1]);
        let b = p(&[1, 1]);
        let (q, r) = divrem(&a, &b);
        assert!(r.is_empty());
        assert_eq!(q, p(&[1, -1]));
    }

    #[test]
    fn gcd_cancels_common_factor() {
        // (x^2-1)/(2x+2) -> (x-1)/2
        let (n, d) = canonical_pair(&p(&[-1, 0, 1]), &p(&[2, 2]));
        assert_eq!(n, vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(d, vec![BigInt::from(2)]);
    }
}
