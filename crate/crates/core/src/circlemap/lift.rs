use std::cmp::Ordering;

use num_bigint::BigInt;

use super::arc::CirclePoint;
use super::interval_map::{IntervalMap, Segment};
use crate::error::{Error, Result};
use crate::exactnum::PiRational;

/// A continuous piecewise-affine lift of a circle map, stored on `[0, 1]` and
/// extended by `F(x + 1) = F(x) + degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    map: IntervalMap,
    degree: i64,
}

impl Lift {
    pub fn new(breakpoints: Vec<PiRational>, values: Vec<PiRational>, degree: i64) -> Result<Self> {
        let map = IntervalMap::new(breakpoints, values)?;
        Self::from_map(map, degree)
    }

    pub fn from_vertices(vertices: &[(PiRational, PiRational)], degree: i64) -> Result<Self> {
        Self::from_map(IntervalMap::from_vertices(vertices)?, degree)
    }

    pub fn from_map(map: IntervalMap, degree: i64) -> Result<Self> {
        if !map.start().is_zero() || *map.end() != PiRational::one() {
            return Err(Error::InvalidLift("breakpoints must run from 0 to 1".into()));
        }
        let v = map.values();
        if v[v.len() - 1] != &v[0] + &PiRational::integer(degree) {
            return Err(Error::InvalidLift(format!("last value must equal first value plus degree {degree}")));
        }
        Ok(Lift { map, degree })
    }

    /// Build from vertices anywhere on the circle: coordinates are reduced into `[0, 1)`
    /// and each value is shifted along with its coordinate, so any lift of the vertex works.
    pub fn from_cyclic_vertices(vertices: &[(PiRational, PiRational)], degree: i64) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidLift("no vertices".into()));
        }
        let deg = PiRational::integer(degree);
        let mut pts: Vec<(PiRational, PiRational)> = vertices
            .iter()
            .map(|(x, y)| {
                let k = x.floor();
                let kk = PiRational::integer(k.clone());
                (x - &kk, y - &(&kk * &deg))
            })
            .collect();
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidLift("repeated vertex coordinate".into()));
        }
        if !pts[0].0.is_zero() {
            let (xl, yl) = pts.last().unwrap();
            let (xl, yl) = (xl - &PiRational::one(), yl - &deg);
            let (xf, yf) = &pts[0];
            let slope = (yf - &yl) / &(xf - &xl);
            let y0 = &yl + &(&slope * &(-&xl));
            pts.insert(0, (PiRational::zero(), y0));
        }
        let end = (PiRational::one(), &pts[0].1 + &deg);
        pts.push(end);
        Self::from_vertices(&pts, degree)
    }

    pub fn identity() -> Self {
        Self::linear(1, PiRational::zero())
    }

    /// `x -> degree * x + offset`.
    pub fn linear(degree: i64, offset: PiRational) -> Self {
        let v1 = &offset + &PiRational::integer(degree);
        Lift { map: IntervalMap::build(vec![PiRational::zero(), PiRational::one()], vec![offset, v1]), degree }
    }

    pub fn rotation(alpha: &PiRational) -> Self {
        Self::linear(1, alpha.clone())
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn breakpoints(&self) -> &[PiRational] {
        self.map.breakpoints()
    }

    pub fn values(&self) -> &[PiRational] {
        self.map.values()
    }

    pub fn slopes(&self) -> &[PiRational] {
        self.map.slopes()
    }

    pub fn as_interval_map(&self) -> &IntervalMap {
        &self.map
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> + '_ {
        self.map.segments()
    }

    pub fn segment_count(&self) -> usize {
        self.map.segment_count()
    }

    pub fn has_nonzero_slopes(&self) -> bool {
        self.map.has_nonzero_slopes()
    }

    /// Value of the degree-periodic extension at any real `x`.
    pub fn eval(&self, x: &PiRational) -> PiRational {
        if x >= &PiRational::zero() && x <= &PiRational::one() {
            return self.map.eval(x);
        }
        let k = x.floor();
        let kk = PiRational::integer(k.clone());
        let y = x - &kk;
        &self.map.eval(&y) + &PiRational::integer(k * BigInt::from(self.degree))
    }

    /// The representative: the circle point `F(x) mod 1`.
    pub fn representative(&self, x: &CirclePoint) -> CirclePoint {
        CirclePoint::new(&self.map.eval(x.coord()))
    }

    /// `[x, f(x), ..., f^n(x)]`.
    pub fn iterate(&self, x: &CirclePoint, n: usize) -> Vec<CirclePoint> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(x.clone());
        for _ in 0..n {
            let next = self.representative(out.last().unwrap());
            out.push(next);
        }
        out
    }

    /// Slopes left and right of the circle point 0.
    fn slopes_at_zero(&self) -> (&PiRational, &PiRational) {
        let s = self.slopes();
        (&s[s.len() - 1], &s[0])
    }

    /// Breakpoints where the slope changes, read cyclically (0 included when the slope
    /// changes across it).
    pub fn deriv_discontinuities(&self) -> Vec<CirclePoint> {
        let mut out = Vec::new();
        let (left, right) = self.slopes_at_zero();
        if left != right {
            out.push(CirclePoint::from_reduced(PiRational::zero()));
        }
        for x in &self.breakpoints()[1..self.breakpoints().len() - 1] {
            out.push(CirclePoint::from_reduced(x.clone()));
        }
        out
    }

    /// Breakpoints where the slope changes sign, read cyclically.
    pub fn turning_points(&self) -> Vec<CirclePoint> {
        let sign = |s: &PiRational| s.try_sign().unwrap_or(Ordering::Equal);
        let mut out = Vec::new();
        let (left, right) = self.slopes_at_zero();
        if sign(left) != sign(right) {
            out.push(CirclePoint::from_reduced(PiRational::zero()));
        }
        let s = self.slopes();
        for j in 1..s.len() {
            if sign(&s[j - 1]) != sign(&s[j]) {
                out.push(CirclePoint::from_reduced(self.breakpoints()[j].clone()));
            }
        }
        out
    }

    /// The graph over the real interval `[lo, hi]` as vertices: both ends plus every
    /// lifted breakpoint strictly inside.
    pub fn vertices_between(&self, lo: &PiRational, hi: &PiRational) -> Vec<(PiRational, PiRational)> {
        let mut out = vec![(lo.clone(), self.eval(lo))];
        let bps = self.breakpoints();
        let last = bps.len() - 1;
        let mut k = lo.floor();
        let mut shift_x = PiRational::integer(k.clone());
        let mut shift_y = PiRational::integer(&k * BigInt::from(self.degree));
        let offset = lo - &shift_x;
        let mut idx = self.map.segment_index(&offset) + 1;
        loop {
            if idx == last {
                k += 1;
                shift_x = PiRational::integer(k.clone());
                shift_y = PiRational::integer(&k * BigInt::from(self.degree));
                idx = 0;
            }
            let x = &bps[idx] + &shift_x;
            if &x >= hi {
                break;
            }
            if &x > lo {
                out.push((x, &self.values()[idx] + &shift_y));
            }
            idx += 1;
        }
        if hi > lo {
            out.push((hi.clone(), self.eval(hi)));
        }
        out
    }

    /// Slope of the lift on `[x0, x1]`, which must not straddle a breakpoint.
    pub fn slope_between(&self, x0: &PiRational, x1: &PiRational) -> &PiRational {
        let mid = x0.midpoint(x1).mod1();
        &self.slopes()[self.map.segment_index(&mid)]
    }

    /// Minimum and maximum of the lift over the real interval `[lo, hi]`.
    pub fn image_interval(&self, lo: &PiRational, hi: &PiRational) -> (PiRational, PiRational) {
        let mut vs = self.vertices_between(lo, hi).into_iter().map(|(_, v)| v);
        let first = vs.next().expect("at least one vertex");
        let (mut min, mut max) = (first.clone(), first);
        for v in vs {
            if v < min {
                min = v;
            } else if v > max {
                max = v;
            }
        }
        (min, max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> PiRational {
        PiRational::ratio(n, d)
    }

    fn p(s: &str) -> PiRational {
        s.parse().unwrap()
    }

    fn doubling() -> Lift {
        Lift::linear(2, PiRational::zero())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(doubling().eval(&p("pi - 3")), p("2 pi - 6"));
        let id = Lift::identity();
        assert_eq!(id.eval(&(&p("pi - 3") + &PiRational::one())), &id.eval(&p("pi - 3")) + &PiRational::one());
        assert_eq!(doubling().eval(&r(-1, 4)), r(-1, 2));
    }

    #[test]
    fn representative_examples() {
        let d = doubling();
        assert_eq!(d.representative(&CirclePoint::new(&r(3, 4))).coord(), &r(1, 2));
        let rot = Lift::rotation(&p("pi - 3"));
        let x = CirclePoint::new(&r(9, 10));
        assert_eq!(rot.representative(&x).coord(), &p("pi - 3 + 9/10 - 1"));
    }

    #[test]
    fn iterate_examples() {
        let orbit = doubling().iterate(&CirclePoint::new(&r(1, 3)), 3);
        let coords: Vec<_> = orbit.iter().map(|c| c.coord().clone()).collect();
        assert_eq!(coords, vec![r(1, 3), r(2, 3), r(1, 3), r(2, 3)]);
        let orbit = doubling().iterate(&CirclePoint::new(&p("pi - 3")), 2);
        // 4 pi - 12 lies in (0.566, 0.567), so its floor is 0.
        assert_eq!(orbit[2].coord(), &p("4 pi - 12"));
        let fixed = Lift::identity().iterate(&CirclePoint::new(&r(2, 7)), 5);
        assert!(fixed.iter().all(|c| c.coord() == &r(2, 7)));
    }

    #[test]
    fn cyclic_vertices_reconstruct_value_at_zero() {
        // Tent of degree 0 given from 1/2 onwards.
        let l = Lift::from_cyclic_vertices(&[(r(1, 2), r(1, 1)), (r(1, 1), r(0, 1))], 0).unwrap();
        assert_eq!(l.breakpoints(), &[r(0, 1), r(1, 2), r(1, 1)]);
        assert_eq!(l.values(), &[r(0, 1), r(1, 1), r(0, 1)]);
        assert_eq!(l.turning_points().len(), 2);
    }

    #[test]
    fn image_interval_wraps() {
        let d = doubling();
        let (lo, hi) = d.image_interval(&r(-1, 4), &r(1, 4));
        assert_eq!((lo, hi), (r(-1, 2), r(1, 2)));
        let tent = Lift::from_vertices(&[(r(0, 1), r(0, 1)), (r(1, 2), r(1, 1)), (r(1, 1), r(0, 1))], 0).unwrap();
        let vs = tent.vertices_between(&r(1, 4), &r(7, 4));
        let xs: Vec<_> = vs.iter().map(|v| v.0.clone()).collect();
        assert_eq!(xs, vec![r(1, 4), r(1, 2), r(1, 1), r(3, 2), r(7, 4)]);
        assert_eq!(tent.image_interval(&r(3, 4), &r(5, 4)), (r(0, 1), r(1, 2)));
    }
}
