//! Building-block maps (full-lap zigzags and boundary-pinch maps) and the snapping
//! procedure into the class whose kinks are exactly the preimages of its critical values.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::One;

use crate::circlemap::{preimage_arc, rotate_domain, sup_dist, Arc, CirclePoint, IntervalMap, Lift};
use crate::error::{Error, Result};
use crate::exactnum::PiRational;

/// A zigzag of `laps` (odd) full laps with turning points at `xbar`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaParams {
    laps: usize,
    xbar: Vec<PiRational>,
}

impl BetaParams {
    pub fn new(laps: usize, xbar: Vec<PiRational>) -> Result<Self> {
        if laps.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("lap count {laps} must be odd")));
        }
        if xbar.len() != laps + 1 {
            return Err(Error::InvalidParams(format!("{laps} laps need {} points, got {}", laps + 1, xbar.len())));
        }
        if !xbar[0].is_zero() || xbar[laps] != PiRational::one() {
            return Err(Error::InvalidParams("lap points must run from 0 to 1".into()));
        }
        if xbar.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("lap points must increase strictly".into()));
        }
        Ok(BetaParams { laps, xbar })
    }

    pub fn equispaced(laps: usize) -> Result<Self> {
        let n = laps as i64;
        Self::new(laps, (0..=n).map(|i| PiRational::ratio(i, n)).collect())
    }

    pub fn laps(&self) -> usize {
        self.laps
    }

    pub fn points(&self) -> &[PiRational] {
        &self.xbar
    }
}

/// The zigzag with values 0, 1, 0, 1, ... at the lap points.
pub fn make_beta(p: &BetaParams) -> IntervalMap {
    let ys = (0..=p.laps).map(|i| if i % 2 == 0 { PiRational::zero() } else { PiRational::one() }).collect();
    IntervalMap::build(p.xbar.clone(), ys)
}

/// Parameters of the boundary-pinch map; every other vertex sits at a fixed offset
/// of `eps/3` from these.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiParams {
    eps: PiRational,
    a_prime: PiRational,
    d: PiRational,
    e: PiRational,
    h_prime: PiRational,
}

/// All vertex abscissae of the pinch map, left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiPoints {
    pub a: PiRational,
    pub a_prime: PiRational,
    pub b_prime: PiRational,
    pub c_prime: PiRational,
    pub d: PiRational,
    pub e: PiRational,
    pub f_prime: PiRational,
    pub g_prime: PiRational,
    pub h_prime: PiRational,
    pub h: PiRational,
}

impl PsiParams {
    pub fn new(eps: PiRational, a_prime: PiRational, d: PiRational, e: PiRational, h_prime: PiRational) -> Result<Self> {
        let third = eps.scale(&BigInt::one(), &BigInt::from(3));
        let two_thirds = eps.scale(&BigInt::from(2), &BigInt::from(3));
        let one = PiRational::one();
        let checks: [(bool, &str); 7] = [
            (eps.is_positive() && eps < PiRational::ratio(1, 2), "0 < eps < 1/2"),
            (third < a_prime, "eps/3 < a'"),
            (&a_prime + &two_thirds < d, "a' + 2eps/3 < d"),
            (d < e, "d < e"),
            (e < &h_prime - &two_thirds, "e < h' - 2eps/3"),
            (h_prime < &one - &third, "h' < 1 - eps/3"),
            (third.is_positive(), "eps/3 > 0"),
        ];
        if let Some((_, which)) = checks.iter().find(|(ok, _)| !ok) {
            return Err(Error::InvalidParams(format!("pinch parameters violate {which}")));
        }
        Ok(PsiParams { eps, a_prime, d, e, h_prime })
    }

    pub fn eps(&self) -> &PiRational {
        &self.eps
    }

    pub fn points(&self) -> PsiPoints {
        let third = self.eps.scale(&BigInt::one(), &BigInt::from(3));
        PsiPoints {
            a: third.clone(),
            a_prime: self.a_prime.clone(),
            b_prime: &self.a_prime + &third,
            c_prime: &(&self.a_prime + &third) + &third,
            d: self.d.clone(),
            e: self.e.clone(),
            f_prime: &(&self.h_prime - &third) - &third,
            g_prime: &self.h_prime - &third,
            h_prime: self.h_prime.clone(),
            h: &PiRational::one() - &third,
        }
    }
}

/// The continuous pinch map fixing 0 and 1 whose middle piece runs over `[d, e]`.
pub fn make_psi(p: &PsiParams) -> IntervalMap {
    let q = p.points();
    let (zero, one) = (PiRational::zero(), PiRational::one());
    let lo = p.eps.clone();
    let hi = &one - &p.eps;
    let xs = vec![zero.clone(), q.a, q.a_prime, q.b_prime, q.c_prime, q.d, q.e, q.f_prime, q.g_prime, q.h_prime, q.h, one.clone()];
    let ys = vec![zero.clone(), lo.clone(), hi.clone(), one.clone(), hi.clone(), lo.clone(), hi.clone(), lo.clone(), zero, lo, hi, one];
    IntervalMap::build(xs, ys)
}

/// Outcome of the normal-form test: kinks must be exactly the preimages of `S`, all in `Q + pi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F0Certificate {
    pub verdict: bool,
    /// `{0}` together with the turning values, reduced mod 1.
    pub s_values: Vec<PiRational>,
    pub offending_points: Vec<PiRational>,
}

pub fn check_f0(l: &Lift) -> F0Certificate {
    let mut s_values: Vec<PiRational> = l.turning_points().iter().map(|t| l.eval(t.coord()).mod1()).collect();
    s_values.push(PiRational::zero());
    s_values.sort();
    s_values.dedup();
    if !l.has_nonzero_slopes() {
        let flat: Vec<PiRational> =
            l.segments().filter(|s| s.slope.is_zero()).map(|s| s.x0.clone()).collect();
        return F0Certificate { verdict: false, s_values, offending_points: flat };
    }
    let mut pre: Vec<PiRational> = Vec::new();
    for s in &s_values {
        let arcs = preimage_arc(l, &Arc::point(&CirclePoint::new(s))).expect("nonzero slopes");
        pre.extend(arcs.into_iter().map(|a| a.start().coord().clone()));
    }
    pre.sort();
    pre.dedup();
    let kinks: Vec<PiRational> = l.deriv_discontinuities().into_iter().map(CirclePoint::into_coord).collect();
    let mut offending: Vec<PiRational> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < kinks.len() || j < pre.len() {
        let ord = match (kinks.get(i), pre.get(j)) {
            (Some(a), Some(b)) => a.cmp(b),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                offending.push(kinks[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                offending.push(pre[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                if !kinks[i].in_q_pi() {
                    offending.push(kinks[i].clone());
                }
                i += 1;
                j += 1;
            }
        }
    }
    F0Certificate { verdict: offending.is_empty(), s_values, offending_points: offending }
}

/// Largest grid exponent tried by [`snap_to_f0`] before giving up.
pub const MAX_GRID_BITS: u32 = 48;

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

/// The point `q + pi` nearest to `x` with `q` a multiple of `2^-bits`.
pub fn nearest_q_pi(x: &PiRational, bits: u32) -> PiRational {
    let den = pow2(bits);
    let shifted = (x - &PiRational::pi()).scale(&den, &BigInt::one());
    let k = (&shifted + &PiRational::ratio(1, 2)).floor();
    &PiRational::integer(k).scale(&BigInt::one(), &den) + &PiRational::pi()
}

fn round_to_grid(v: &PiRational, bits: u32) -> PiRational {
    let den = pow2(bits);
    let k = (&v.scale(&den, &BigInt::one()) + &PiRational::ratio(1, 2)).floor();
    PiRational::integer(k).scale(&BigInt::one(), &den)
}

/// A nearby lift in normal form: kinks exactly at the preimages of `S`, all in `Q + pi`.
///
/// Members are returned unchanged. A lift with rational kinks that satisfies the
/// kink/preimage identity is moved into normal form by one small rotation of its
/// domain. Anything else is rebuilt on a dyadic value grid, see [`snap_on_grid`].
pub fn snap_to_f0(l: &Lift, eps: &PiRational) -> Result<Lift> {
    if !eps.is_positive() {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    if check_f0(l).verdict {
        return Ok(l.clone());
    }
    if let Some(rotated) = rotate_into_f0(l, eps) {
        return Ok(rotated);
    }
    // Start with grid cells of at most eps/8.
    let mut bits = 3;
    while PiRational::one().scale(&BigInt::one(), &pow2(bits)) > eps.scale(&BigInt::one(), &BigInt::from(8)) {
        bits += 1;
    }
    let mut last_remaining = 0;
    while bits <= MAX_GRID_BITS {
        if let Some(out) = snap_on_grid(l, eps, bits)? {
            let cert = check_f0(&out);
            if cert.verdict && &sup_dist(l, &out) < eps {
                return Ok(out);
            }
            last_remaining = cert.offending_points.len();
        }
        bits += 1;
    }
    if last_remaining > 0 {
        Err(Error::SnapBound { remaining: last_remaining })
    } else {
        Err(Error::PrecisionBudget)
    }
}

/// Rotate the domain by `r - pi` for a rational `r` just below `pi`, which moves rational
/// kinks into `Q + pi`; succeeds when the result is already in normal form.
pub fn rotate_into_f0(l: &Lift, eps: &PiRational) -> Option<Lift> {
    if !l.breakpoints().iter().all(PiRational::is_rational) {
        return None;
    }
    let pi = PiRational::pi();
    for bits in 2..=MAX_GRID_BITS {
        let den = pow2(bits);
        let r = PiRational::integer(pi.scale(&den, &BigInt::one()).floor()).scale(&BigInt::one(), &den);
        let candidate = rotate_domain(l, &(&r - &pi));
        if !check_f0(&candidate).verdict {
            return None;
        }
        if &sup_dist(l, &candidate) < eps {
            return Some(candidate);
        }
    }
    None
}

fn sign(v: &PiRational) -> Ordering {
    v.try_sign().unwrap_or(Ordering::Equal)
}

/// Cyclic vertex list `(x, value)` with `x` increasing over one period; the closing
/// vertex is the first one shifted by `(1, degree)`.
struct Cycle {
    pts: Vec<(PiRational, PiRational)>,
    degree: PiRational,
}

impl Cycle {
    fn next(&self, i: usize) -> (PiRational, PiRational) {
        if i + 1 < self.pts.len() {
            self.pts[i + 1].clone()
        } else {
            let (x, v) = &self.pts[0];
            (x + &PiRational::one(), v + &self.degree)
        }
    }

    fn prev(&self, i: usize) -> (PiRational, PiRational) {
        if i > 0 {
            self.pts[i - 1].clone()
        } else {
            let (x, v) = &self.pts[self.pts.len() - 1];
            (x - &PiRational::one(), v - &self.degree)
        }
    }

    fn direction(&self, i: usize) -> Ordering {
        sign(&(&self.next(i).1 - &self.pts[i].1))
    }

    fn turning(&self, i: usize) -> bool {
        let before = if i > 0 { i - 1 } else { self.pts.len() - 1 };
        self.direction(before) != self.direction(i)
    }
}

/// One attempt of the grid construction with value grid `2^-bits`:
///
/// 1. kink values are rounded to the grid (rejected if a piece changes direction);
/// 2. a monotone kink whose value is not yet critical gets a one-cell dip after it,
///    turning it into a peak or valley;
/// 3. every crossing of a critical level becomes a vertex;
/// 4. vertices move to nearby points of `Q + pi`, nudged until every non-turning
///    vertex is a genuine kink.
///
/// Every piece then spans the gap between two critical levels, so the kinks are
/// exactly the preimages of the critical set. The caller checks the distance.
pub fn snap_on_grid(l: &Lift, eps: &PiRational, bits: u32) -> Result<Option<Lift>> {
    let degree = l.degree();
    let cell = PiRational::integer(1).scale(&BigInt::one(), &pow2(bits));
    let mut xs: Vec<PiRational> = l.deriv_discontinuities().into_iter().map(CirclePoint::into_coord).collect();
    if xs.is_empty() {
        xs.push(PiRational::zero());
    }
    let original: Vec<PiRational> = xs.iter().map(|x| l.eval(x)).collect();
    let mut cycle = Cycle {
        pts: xs.into_iter().zip(original.iter().map(|v| round_to_grid(v, bits))).collect(),
        degree: PiRational::integer(degree),
    };
    let raw = Cycle { pts: cycle.pts.iter().map(|p| p.0.clone()).zip(original).collect(), degree: cycle.degree.clone() };
    if (0..cycle.pts.len()).any(|i| cycle.direction(i) == Ordering::Equal || cycle.direction(i) != raw.direction(i)) {
        return Ok(None);
    }

    let mut levels: Vec<PiRational> = vec![PiRational::zero()];
    for i in 0..cycle.pts.len() {
        if cycle.turning(i) {
            levels.push(cycle.pts[i].1.mod1());
        }
    }
    levels.sort();
    levels.dedup();

    let single = cycle.pts.len() == 1;
    let mut dipped = Vec::with_capacity(cycle.pts.len() * 2);
    for i in 0..cycle.pts.len() {
        let (x, w) = cycle.pts[i].clone();
        dipped.push((x.clone(), w.clone()));
        if cycle.turning(i) || (!single && levels.binary_search(&w.mod1()).is_ok()) {
            continue;
        }
        let (nx, nw) = cycle.next(i);
        let rise = &nw - &w;
        let up = rise.is_positive();
        let dip = if up { &w - &cell } else { &w + &cell };
        let cells = (&rise.abs() / &cell).floor().max(BigInt::one());
        let step = (&nx - &x).scale(&BigInt::one(), &(cells * 4));
        dipped.push((&x + &step, dip.clone()));
        for v in [w.mod1(), dip.mod1()] {
            if let Err(pos) = levels.binary_search(&v) {
                levels.insert(pos, v);
            }
        }
    }
    cycle.pts = dipped;

    let mut crossed = Vec::with_capacity(cycle.pts.len() * 4);
    for i in 0..cycle.pts.len() {
        let (x0, w0) = cycle.pts[i].clone();
        let (x1, w1) = cycle.next(i);
        crossed.push((x0.clone(), w0.clone()));
        let (lo, hi) = if w0 < w1 { (&w0, &w1) } else { (&w1, &w0) };
        let mut hits: Vec<PiRational> = Vec::new();
        for s in &levels {
            let mut k: BigInt = (lo - s).floor() + 1;
            loop {
                let level = s + &PiRational::integer(k.clone());
                if &level >= hi {
                    break;
                }
                hits.push(level);
                k += 1;
            }
        }
        hits.sort();
        if w1 < w0 {
            hits.reverse();
        }
        let run = &x1 - &x0;
        let rise = &w1 - &w0;
        for level in hits {
            let x = &x0 + &(&run * &(&(&level - &w0) / &rise));
            crossed.push((x, level));
        }
    }
    cycle.pts = crossed;

    // Move to Q + pi, far below half the smallest gap and within eps/8 of the grid map.
    let n = cycle.pts.len();
    let mut min_gap = PiRational::one();
    let mut max_slope = PiRational::one();
    for i in 0..n {
        let (x1, w1) = cycle.next(i);
        let gap = &x1 - &cycle.pts[i].0;
        let slope = (&w1 - &cycle.pts[i].1).abs() / &gap;
        if gap < min_gap {
            min_gap = gap;
        }
        if slope > max_slope {
            max_slope = slope;
        }
    }
    let budget = eps.scale(&BigInt::one(), &BigInt::from(8)) / &max_slope;
    let room = if budget < min_gap { budget } else { min_gap };
    let mut xbits = 4;
    while PiRational::integer(64).scale(&BigInt::one(), &pow2(xbits)) >= room {
        xbits += 1;
    }
    let nudge = PiRational::integer(1).scale(&BigInt::one(), &pow2(xbits));
    let turning: Vec<bool> = (0..n).map(|i| cycle.turning(i)).collect();
    for p in cycle.pts.iter_mut() {
        p.0 = nearest_q_pi(&p.0, xbits);
    }
    let slope_at = |c: &Cycle, i: usize, after: bool| {
        let (a, b) = if after { (c.pts[i].clone(), c.next(i)) } else { (c.prev(i), c.pts[i].clone()) };
        (&b.1 - &a.1) / &(&b.0 - &a.0)
    };
    let mut settled = false;
    for _ in 0..8 {
        settled = true;
        for i in 0..n {
            if !turning[i] && slope_at(&cycle, i, false) == slope_at(&cycle, i, true) {
                cycle.pts[i].0 += &nudge;
                settled = false;
            }
        }
        if settled {
            break;
        }
    }
    if !settled {
        return Ok(None);
    }
    Lift::from_cyclic_vertices(&cycle.pts, degree).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{distribution, is_preserving, slope_sum_at};

    fn r(n: i64, d: i64) -> PiRational {
        PiRational::ratio(n, d)
    }

    fn fig3() -> PsiParams {
        PsiParams::new(r(3, 20), r(2, 20), r(5, 20), r(13, 20), r(18, 20)).unwrap()
    }

    #[test]
    fn beta_examples() {
        let b = make_beta(&BetaParams::equispaced(3).unwrap());
        assert_eq!(b.slopes(), &[r(3, 1), r(-3, 1), r(3, 1)]);
        let b = make_beta(&BetaParams::new(3, vec![r(0, 1), r(1, 4), r(1, 2), r(1, 1)]).unwrap());
        assert_eq!(b.slopes(), &[r(4, 1), r(-4, 1), r(2, 1)]);
        let b = make_beta(&BetaParams::equispaced(5).unwrap());
        assert!(b.slopes().iter().all(|s| s.abs() == r(5, 1)));
        assert!(BetaParams::new(2, vec![r(0, 1), r(1, 2), r(1, 1)]).is_err());
    }

    #[test]
    fn psi_fig3_instance() {
        let psi = make_psi(&fig3());
        assert_eq!(psi.eval(&r(3, 20)), r(1, 1));
        assert_eq!(psi.eval(&r(17, 20)), r(0, 1));
        assert_eq!(psi.eval(&r(0, 1)), r(0, 1));
        assert_eq!(psi.eval(&r(1, 1)), r(1, 1));
        assert_eq!(psi.breakpoints().len(), 12);
        let lift = Lift::from_map(psi.clone(), 1).unwrap();
        for y in [r(1, 20), r(1, 2), r(19, 20)] {
            assert_eq!(slope_sum_at(&lift, &y).unwrap(), r(1, 1));
        }
        assert!(is_preserving(&lift).unwrap().verdict);
        assert_eq!(distribution(&psi).unwrap().as_map(), &IntervalMap::build(vec![r(0, 1), r(1, 1)], vec![r(0, 1), r(1, 1)]));
    }

    #[test]
    fn psi_rejects_each_inequality() {
        assert!(PsiParams::new(r(3, 20), r(1, 20), r(5, 20), r(13, 20), r(18, 20)).is_err());
        assert!(PsiParams::new(r(3, 20), r(2, 20), r(4, 20), r(13, 20), r(18, 20)).is_err());
        assert!(PsiParams::new(r(3, 20), r(2, 20), r(5, 20), r(17, 20), r(18, 20)).is_err());
        assert!(PsiParams::new(r(3, 20), r(2, 20), r(5, 20), r(13, 20), r(19, 20)).is_err());
        let err = PsiParams::new(r(1, 1), r(2, 20), r(5, 20), r(13, 20), r(18, 20)).unwrap_err();
        assert!(err.to_string().contains("0 < eps < 1/2"));
    }

    #[test]
    fn check_f0_examples() {
        let doubling = Lift::linear(2, PiRational::zero());
        let cert = check_f0(&doubling);
        assert!(!cert.verdict);
        assert_eq!(cert.offending_points, vec![r(0, 1), r(1, 2)]);
    }

    #[test]
    fn snap_doubling() {
        let doubling = Lift::linear(2, PiRational::zero());
        let eps = r(1, 10);
        let out = snap_to_f0(&doubling, &eps).unwrap();
        assert!(check_f0(&out).verdict);
        assert!(sup_dist(&doubling, &out) < eps);
        assert_eq!(out.degree(), 2);
        assert_eq!(snap_to_f0(&out, &eps).unwrap(), out);
    }

    #[test]
    fn snap_rotation_and_tent() {
        let eps = r(1, 20);
        for l in [
            Lift::rotation(&r(1, 3)),
            Lift::identity(),
            Lift::from_vertices(&[(r(0, 1), r(0, 1)), (r(1, 2), r(1, 1)), (r(1, 1), r(0, 1))], 0).unwrap(),
        ] {
            let out = snap_to_f0(&l, &eps).unwrap();
            assert!(check_f0(&out).verdict, "{out:?}");
            assert!(sup_dist(&l, &out) < eps);
        }
    }
}
