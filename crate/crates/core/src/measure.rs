//! Lebesgue measure on the circle: the reciprocal-slope criterion, the outer
//! homeomorphism and the conjugation that makes a map measure preserving.

use std::cmp::Ordering;

use num_bigint::BigInt;

use crate::circlemap::{compose_outer, IntervalMap, Lift};
use crate::error::{Error, Result};
use crate::exactnum::PiRational;

/// Verdict of the reciprocal-slope test, with one witness per value band.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreservationCertificate {
    pub verdict: bool,
    /// `(sample value, sum of 1/|slope| over its preimages)`, one per band.
    pub witnesses: Vec<(PiRational, PiRational)>,
    /// Sorted critical values in `[0, 1)`, starting with 0.
    pub critical_values: Vec<PiRational>,
}

/// A nondecreasing piecewise-affine function `y -> λ{x : f(x) < y}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionFunction(IntervalMap);

impl DistributionFunction {
    pub fn as_map(&self) -> &IntervalMap {
        &self.0
    }

    pub fn eval(&self, y: &PiRational) -> PiRational {
        self.0.eval(y)
    }

    pub fn is_identity(&self) -> bool {
        self.0.slopes().len() == 1 && self.0.slopes()[0] == PiRational::one() && self.0.start() == &self.0.values()[0]
    }

    /// The circle homeomorphism with this graph (domain and range `[0, 1]`).
    pub fn to_lift(&self) -> Result<Lift> {
        Lift::from_map(self.0.clone(), 1)
    }
}

fn reciprocal_abs(s: &PiRational) -> Result<PiRational> {
    if s.is_zero() {
        return Err(Error::FlatPiece);
    }
    s.abs().recip()
}

/// `{0}` together with every vertex value reduced mod 1, sorted and deduplicated.
pub fn critical_values(l: &Lift) -> Vec<PiRational> {
    let mut out: Vec<PiRational> = l.values().iter().map(|v| v.mod1()).collect();
    out.push(PiRational::zero());
    out.sort();
    out.dedup();
    out
}

/// Exact `sum 1/|F'(x)|` over the preimages of `y` under the representative.
pub fn slope_sum_at(l: &Lift, y: &PiRational) -> Result<PiRational> {
    let y = y.mod1();
    if critical_values(l).binary_search(&y).is_ok() {
        return Err(Error::CriticalValue);
    }
    let mut total = PiRational::zero();
    for seg in l.segments() {
        let w = reciprocal_abs(seg.slope)?;
        // y is not a vertex value mod 1, so the count of y + k inside the open range is
        // floor(M - y) - floor(m - y).
        let count: BigInt = (seg.max_value() - &y).floor() - (seg.min_value() - &y).floor();
        total += &(&w * &PiRational::integer(count));
    }
    Ok(total)
}

/// Critical values and the constant reciprocal-slope sum on each band between them
/// (the last band runs up to 1).
pub fn band_sums(l: &Lift) -> Result<(Vec<PiRational>, Vec<PiRational>)> {
    let one = PiRational::one();
    let mut base = PiRational::zero();
    let mut events: Vec<(PiRational, PiRational)> = Vec::new();
    for seg in l.segments() {
        let w = reciprocal_abs(seg.slope)?;
        let (m, big_m) = (seg.min_value(), seg.max_value());
        let len = big_m - m;
        let wraps = len.floor();
        let rest = &len - &PiRational::integer(wraps.clone());
        base += &(&w * &PiRational::integer(wraps));
        if rest.is_zero() {
            continue;
        }
        let start = m.mod1();
        let end = &start + &rest;
        match end.cmp(&one) {
            Ordering::Less => {
                events.push((start, w.clone()));
                events.push((end, -&w));
            }
            Ordering::Equal => events.push((start, w)),
            Ordering::Greater => {
                base += &w;
                events.push((start, w.clone()));
                events.push((&end - &one, -&w));
            }
        }
    }
    events.sort_by(|a, b| a.0.cmp(&b.0));
    let crit = critical_values(l);
    let mut sums = Vec::with_capacity(crit.len());
    let mut running = base;
    let mut e = 0;
    for c in &crit {
        while e < events.len() && &events[e].0 <= c {
            running += &events[e].1;
            e += 1;
        }
        sums.push(running.clone());
    }
    Ok((crit, sums))
}

/// Decide Lebesgue preservation by sampling the band midpoints.
pub fn is_preserving(l: &Lift) -> Result<PreservationCertificate> {
    let (crit, sums) = band_sums(l)?;
    let one = PiRational::one();
    let witnesses: Vec<(PiRational, PiRational)> = crit
        .iter()
        .enumerate()
        .zip(sums)
        .map(|((j, c), s)| (c.midpoint(crit.get(j + 1).unwrap_or(&one)), s))
        .collect();
    let verdict = witnesses.iter().all(|(_, s)| *s == one);
    Ok(PreservationCertificate { verdict, witnesses, critical_values: crit })
}

/// `h(x) = λ(F⁻¹((0, x)))`, an increasing homeomorphism of `[0, 1]`.
pub fn outer_homeo(l: &Lift) -> Result<DistributionFunction> {
    let (crit, sums) = band_sums(l)?;
    if sums.iter().any(|s| s.is_zero()) {
        return Err(Error::NotOnto);
    }
    let one = PiRational::one();
    let mut xs = crit.clone();
    xs.push(one.clone());
    let mut ys = vec![PiRational::zero()];
    for (j, s) in sums.iter().enumerate() {
        let width = &xs[j + 1] - &xs[j];
        let next = ys.last().unwrap() + &(s * &width);
        ys.push(next);
    }
    // The preimage of a single point is null, so the total mass is exactly 1.
    debug_assert!(ys.last().unwrap() == &one);
    Ok(DistributionFunction(IntervalMap::new(xs, ys)?))
}

/// `G = h ∘ F` with `h` the outer homeomorphism of `F`.
pub fn lebesgueize(l: &Lift) -> Result<Lift> {
    let h = outer_homeo(l)?;
    if h.is_identity() {
        return Ok(l.clone());
    }
    compose_outer(&h.to_lift()?, l)
}

/// `y -> λ{x in the domain : f(x) < y}` on the value range of an interval map.
pub fn distribution(f: &IntervalMap) -> Result<DistributionFunction> {
    let mut events: Vec<(PiRational, PiRational)> = Vec::new();
    for seg in f.segments() {
        let w = reciprocal_abs(seg.slope)?;
        events.push((seg.min_value().clone(), w.clone()));
        events.push((seg.max_value().clone(), -w));
    }
    events.sort_by(|a, b| a.0.cmp(&b.0));
    let mut xs: Vec<PiRational> = events.iter().map(|e| e.0.clone()).collect();
    xs.dedup();
    let mut ys = vec![PiRational::zero()];
    let mut running = PiRational::zero();
    let mut e = 0;
    for j in 0..xs.len() - 1 {
        while e < events.len() && events[e].0 <= xs[j] {
            running += &events[e].1;
            e += 1;
        }
        let next = ys.last().unwrap() + &(&running * &(&xs[j + 1] - &xs[j]));
        ys.push(next);
    }
    Ok(DistributionFunction(IntervalMap::new(xs, ys)?))
}

/// Whether `f` and `g` give every Borel set preimages of equal measure.
pub fn lambda_equivalent(f: &IntervalMap, g: &IntervalMap) -> Result<bool> {
    if f.start() != g.start() || f.end() != g.end() {
        return Err(Error::DomainMismatch);
    }
    Ok(distribution(f)? == distribution(g)?)
}

/// The affine surjection `[a, b] -> [c, d]`, increasing or decreasing.
pub fn affine_onto(a: &PiRational, b: &PiRational, c: &PiRational, d: &PiRational, increasing: bool) -> Result<IntervalMap> {
    IntervalMap::affine_onto(a, b, c, d, increasing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> PiRational {
        PiRational::ratio(n, d)
    }

    fn lift(vs: &[(i64, i64, i64, i64)], degree: i64) -> Lift {
        let v: Vec<_> = vs.iter().map(|&(a, b, c, d)| (r(a, b), r(c, d))).collect();
        Lift::from_vertices(&v, degree).unwrap()
    }

    fn monotone() -> Lift {
        lift(&[(0, 1, 0, 1), (1, 4, 3, 4), (1, 1, 1, 1)], 1)
    }

    fn beta3() -> Lift {
        lift(&[(0, 1, 0, 1), (1, 4, 1, 1), (1, 2, 0, 1), (1, 1, 1, 1)], 1)
    }

    #[test]
    fn slope_sums() {
        let doubling = Lift::linear(2, PiRational::zero());
        assert_eq!(slope_sum_at(&doubling, &r(1, 3)).unwrap(), r(1, 1));
        assert_eq!(slope_sum_at(&beta3(), &r(1, 2)).unwrap(), r(1, 1));
        assert_eq!(slope_sum_at(&monotone(), &r(1, 2)).unwrap(), r(1, 3));
        assert!(matches!(slope_sum_at(&monotone(), &r(3, 4)), Err(Error::CriticalValue)));
    }

    #[test]
    fn band_sweep_matches_pointwise_sums() {
        let l = lift(&[(0, 1, 1, 10), (1, 3, 13, 10), (1, 2, 1, 2), (4, 5, 17, 10), (1, 1, 11, 10)], 1);
        let (crit, sums) = band_sums(&l).unwrap();
        for (j, s) in sums.iter().enumerate() {
            let next = crit.get(j + 1).cloned().unwrap_or_else(PiRational::one);
            assert_eq!(&slope_sum_at(&l, &crit[j].midpoint(&next)).unwrap(), s);
        }
    }

    #[test]
    fn preservation_examples() {
        assert!(is_preserving(&Lift::linear(2, PiRational::zero())).unwrap().verdict);
        assert!(is_preserving(&beta3()).unwrap().verdict);
        assert!(!is_preserving(&monotone()).unwrap().verdict);
    }

    #[test]
    fn outer_homeo_examples() {
        let doubling = Lift::linear(2, PiRational::zero());
        assert!(outer_homeo(&doubling).unwrap().is_identity());
        let h = outer_homeo(&monotone()).unwrap();
        assert_eq!(h.as_map().breakpoints(), &[r(0, 1), r(3, 4), r(1, 1)]);
        assert_eq!(h.as_map().values(), &[r(0, 1), r(1, 4), r(1, 1)]);
        assert_eq!(h.as_map().slopes(), &[r(1, 3), r(3, 1)]);
        assert_eq!(lebesgueize(&monotone()).unwrap(), Lift::identity());
        assert_eq!(lebesgueize(&doubling).unwrap(), doubling);
        let short = lift(&[(0, 1, 0, 1), (1, 2, 1, 2), (1, 1, 0, 1)], 0);
        assert!(matches!(outer_homeo(&short), Err(Error::NotOnto)));
    }

    #[test]
    fn distribution_examples() {
        let id = affine_onto(&r(0, 1), &r(1, 1), &r(0, 1), &r(1, 1), true).unwrap();
        assert_eq!(distribution(&id).unwrap().as_map(), &id);
        let tent = IntervalMap::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![r(0, 1), r(1, 1), r(0, 1)]).unwrap();
        assert_eq!(distribution(&tent).unwrap().as_map(), &id);
        let steep = affine_onto(&r(0, 1), &r(1, 3), &r(0, 1), &r(1, 1), true).unwrap();
        assert_eq!(distribution(&steep).unwrap().eval(&r(1, 2)), r(1, 6));
        let up = affine_onto(&r(0, 1), &r(1, 2), &r(0, 1), &r(1, 1), true).unwrap();
        let down = affine_onto(&r(0, 1), &r(1, 2), &r(0, 1), &r(1, 1), false).unwrap();
        assert!(lambda_equivalent(&up, &down).unwrap());
        assert!(!lambda_equivalent(&up, &tent.rescale(&r(0, 1), &r(1, 2), &r(0, 1), &r(1, 2), true)).unwrap());
        assert!(matches!(lambda_equivalent(&up, &id), Err(Error::DomainMismatch)));
    }

    #[test]
    fn affine_onto_examples() {
        let down = affine_onto(&r(0, 1), &r(1, 1), &r(0, 1), &r(1, 1), false).unwrap();
        assert_eq!(down.eval(&r(1, 4)), r(3, 4));
        let m = affine_onto(&r(1, 4), &r(1, 2), &r(0, 1), &r(1, 1), true).unwrap();
        assert_eq!(m.eval(&r(3, 8)), r(1, 2));
        assert_eq!(m.slopes()[0], r(4, 1));
        assert!(affine_onto(&r(1, 2), &r(1, 2), &r(0, 1), &r(1, 1), true).is_err());
    }
}
