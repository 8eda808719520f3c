use std::fmt;

use crate::exactnum::PiRational;

/// A point of the circle, stored as its coordinate in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CirclePoint(PiRational);

impl CirclePoint {
    /// Reduce any real coordinate onto the circle.
    pub fn new(x: &PiRational) -> Self {
        CirclePoint(x.mod1())
    }

    pub(crate) fn from_reduced(x: PiRational) -> Self {
        debug_assert!(!x.is_negative() && x < PiRational::one());
        CirclePoint(x)
    }

    pub fn coord(&self) -> &PiRational {
        &self.0
    }

    pub fn into_coord(self) -> PiRational {
        self.0
    }
}

impl From<PiRational> for CirclePoint {
    fn from(x: PiRational) -> Self {
        CirclePoint::new(&x)
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "φ({:?})", self.0)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Distance from a real number to the nearest integer.
pub fn dist_to_integer(x: &PiRational) -> PiRational {
    let r = x.mod1();
    let other = PiRational::one() - &r;
    if r <= other {
        r
    } else {
        other
    }
}

/// Normalized arc-length distance on the circle, in `[0, 1/2]`.
pub fn circle_dist(x: &CirclePoint, y: &CirclePoint) -> PiRational {
    dist_to_integer(&(x.coord() - y.coord()))
}

/// A closed arc running counterclockwise from `start` over `length`.
#[derive(Clone, PartialEq, Eq)]
pub struct Arc {
    start: CirclePoint,
    length: PiRational,
    full: bool,
}

impl Arc {
    /// The arc from `start` counterclockwise to `end`; equal ends give a single point.
    pub fn new(start: &CirclePoint, end: &CirclePoint) -> Self {
        Arc { start: start.clone(), length: (end.coord() - start.coord()).mod1(), full: false }
    }

    pub fn full() -> Self {
        Arc { start: CirclePoint(PiRational::zero()), length: PiRational::one(), full: true }
    }

    pub fn point(x: &CirclePoint) -> Self {
        Arc { start: x.clone(), length: PiRational::zero(), full: false }
    }

    /// The projection of the real interval `[lo, hi]`.
    pub fn from_lifted(lo: &PiRational, hi: &PiRational) -> Self {
        let length = hi - lo;
        if length >= PiRational::one() {
            return Arc::full();
        }
        Arc { start: CirclePoint::new(lo), length, full: false }
    }

    pub fn start(&self) -> &CirclePoint {
        &self.start
    }

    pub fn end(&self) -> CirclePoint {
        CirclePoint::new(&(self.start.coord() + &self.length))
    }

    pub fn length(&self) -> &PiRational {
        &self.length
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Lifted endpoints `(lo, lo + length)` with `lo` in `[0, 1)`.
    pub fn lifted(&self) -> (PiRational, PiRational) {
        (self.start.coord().clone(), self.start.coord() + &self.length)
    }

    /// Largest circle distance between two points of the arc.
    pub fn diameter(&self) -> PiRational {
        let half = PiRational::ratio(1, 2);
        if self.length < half {
            self.length.clone()
        } else {
            half
        }
    }

    pub fn midpoint(&self) -> CirclePoint {
        CirclePoint::new(&(self.start.coord() + &self.length.half()))
    }

    pub fn contains(&self, x: &CirclePoint) -> bool {
        self.full || (x.coord() - self.start.coord()).mod1() <= self.length
    }

    pub fn contains_arc(&self, other: &Arc) -> bool {
        if self.full {
            return true;
        }
        if other.full {
            return false;
        }
        let offset = (other.start.coord() - self.start.coord()).mod1();
        &offset + &other.length <= self.length
    }

    pub fn intersects(&self, other: &Arc) -> bool {
        self.full
            || other.full
            || (other.start.coord() - self.start.coord()).mod1() <= self.length
            || (self.start.coord() - other.start.coord()).mod1() <= other.length
    }

    /// Whether the open arcs share a point (touching at an endpoint does not count).
    pub fn overlaps_interior(&self, other: &Arc) -> bool {
        if self.full || other.full {
            return !self.length.is_zero() && !other.length.is_zero();
        }
        let a = (other.start.coord() - self.start.coord()).mod1();
        let b = (self.start.coord() - other.start.coord()).mod1();
        (a < self.length && !other.length.is_zero()) || (b < other.length && !self.length.is_zero())
    }

    /// The closed `r`-neighbourhood.
    pub fn inflate(&self, r: &PiRational) -> Self {
        if self.full {
            return self.clone();
        }
        let (lo, hi) = self.lifted();
        Arc::from_lifted(&(&lo - r), &(&hi + r))
    }
}

impl fmt::Debug for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.full {
            write!(f, "Arc(full)")
        } else {
            write!(f, "Arc[{:?} +{:?}]", self.start.coord(), self.length)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64, d: i64) -> CirclePoint {
        CirclePoint::new(&PiRational::ratio(n, d))
    }

    #[test]
    fn distance_examples() {
        assert_eq!(circle_dist(&c(1, 10), &c(9, 10)), PiRational::ratio(1, 5));
        assert_eq!(circle_dist(&c(3, 7), &c(3, 7)), PiRational::zero());
        let x: PiRational = "pi - 3".parse().unwrap();
        assert_eq!(circle_dist(&c(0, 1), &CirclePoint::new(&x)), x);
    }

    #[test]
    fn wrapping_arc_relations() {
        let a = Arc::new(&c(9, 10), &c(1, 10));
        assert_eq!(a.length(), &PiRational::ratio(1, 5));
        assert!(a.contains(&c(0, 1)));
        assert!(!a.contains(&c(1, 2)));
        assert!(a.contains_arc(&Arc::new(&c(19, 20), &c(1, 20))));
        assert!(!a.contains_arc(&Arc::new(&c(1, 20), &c(19, 20))));
        assert!(a.intersects(&Arc::new(&c(1, 10), &c(1, 2))));
        assert!(!a.overlaps_interior(&Arc::new(&c(1, 10), &c(1, 2))));
        assert_eq!(a.diameter(), PiRational::ratio(1, 5));
        assert!(Arc::from_lifted(&PiRational::ratio(-1, 2), &PiRational::ratio(3, 4)).is_full());
    }
}
