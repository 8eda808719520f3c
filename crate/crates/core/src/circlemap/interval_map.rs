use crate::error::{Error, Result};
use crate::exactnum::PiRational;

/// A continuous piecewise-affine map on a closed interval, stored by its vertices.
///
/// Consecutive pieces with equal slope are always merged, so two maps are equal
/// exactly when their vertex lists are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalMap {
    xs: Vec<PiRational>,
    ys: Vec<PiRational>,
    slopes: Vec<PiRational>,
}

/// One affine piece `[x0, x1] -> [y0, y1]` (values in the order of the domain).
#[derive(Clone, Debug)]
pub struct Segment<'a> {
    pub index: usize,
    pub x0: &'a PiRational,
    pub x1: &'a PiRational,
    pub y0: &'a PiRational,
    pub y1: &'a PiRational,
    pub slope: &'a PiRational,
}

impl Segment<'_> {
    pub fn min_value(&self) -> &PiRational {
        if self.y0 <= self.y1 {
            self.y0
        } else {
            self.y1
        }
    }

    pub fn max_value(&self) -> &PiRational {
        if self.y0 <= self.y1 {
            self.y1
        } else {
            self.y0
        }
    }

    /// The point of the piece with value `y`; `y` must lie between the end values and
    /// the slope must be nonzero.
    pub fn solve(&self, y: &PiRational) -> PiRational {
        if y == self.y0 {
            return self.x0.clone();
        }
        if y == self.y1 {
            return self.x1.clone();
        }
        self.x0 + &((y - self.y0) / self.slope)
    }

    pub fn eval(&self, x: &PiRational) -> PiRational {
        if x == self.x0 {
            return self.y0.clone();
        }
        if x == self.x1 {
            return self.y1.clone();
        }
        self.y0 + &(self.slope * &(x - self.x0))
    }
}

impl IntervalMap {
    pub fn new(xs: Vec<PiRational>, ys: Vec<PiRational>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidLift("breakpoint and value lists differ in length".into()));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidLift("need at least two vertices".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLift("breakpoints not strictly increasing".into()));
        }
        Ok(Self::build(xs, ys))
    }

    pub fn from_vertices(vertices: &[(PiRational, PiRational)]) -> Result<Self> {
        let (xs, ys) = vertices.iter().cloned().unzip();
        Self::new(xs, ys)
    }

    /// Build from vertices already known to be strictly increasing.
    pub(crate) fn build(xs: Vec<PiRational>, ys: Vec<PiRational>) -> Self {
        let raw: Vec<PiRational> = (0..xs.len() - 1).map(|j| (&ys[j + 1] - &ys[j]) / (&xs[j + 1] - &xs[j])).collect();
        let mut keep_x = vec![xs[0].clone()];
        let mut keep_y = vec![ys[0].clone()];
        let mut slopes = vec![raw[0].clone()];
        for j in 1..xs.len() - 1 {
            if raw[j] != *slopes.last().unwrap() {
                keep_x.push(xs[j].clone());
                keep_y.push(ys[j].clone());
                slopes.push(raw[j].clone());
            }
        }
        keep_x.push(xs[xs.len() - 1].clone());
        keep_y.push(ys[ys.len() - 1].clone());
        IntervalMap { xs: keep_x, ys: keep_y, slopes }
    }

    /// The affine map taking `[a, b]` onto `[c, d]`, increasing or decreasing.
    pub fn affine_onto(a: &PiRational, b: &PiRational, c: &PiRational, d: &PiRational, increasing: bool) -> Result<Self> {
        if a >= b || c >= d {
            return Err(Error::DegenerateInterval);
        }
        let ys = if increasing { vec![c.clone(), d.clone()] } else { vec![d.clone(), c.clone()] };
        Ok(Self::build(vec![a.clone(), b.clone()], ys))
    }

    pub fn breakpoints(&self) -> &[PiRational] {
        &self.xs
    }

    pub fn values(&self) -> &[PiRational] {
        &self.ys
    }

    pub fn slopes(&self) -> &[PiRational] {
        &self.slopes
    }

    pub fn start(&self) -> &PiRational {
        &self.xs[0]
    }

    pub fn end(&self) -> &PiRational {
        &self.xs[self.xs.len() - 1]
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    pub fn segment(&self, j: usize) -> Segment<'_> {
        Segment {
            index: j,
            x0: &self.xs[j],
            x1: &self.xs[j + 1],
            y0: &self.ys[j],
            y1: &self.ys[j + 1],
            slope: &self.slopes[j],
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> + '_ {
        (0..self.segment_count()).map(move |j| self.segment(j))
    }

    pub fn has_nonzero_slopes(&self) -> bool {
        self.slopes.iter().all(|s| !s.is_zero())
    }

    /// Index of a piece containing `x` (the left one at an interior vertex).
    pub fn segment_index(&self, x: &PiRational) -> usize {
        let (mut lo, mut hi) = (0, self.xs.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if &self.xs[mid] < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Value at `x`; `x` is expected inside the domain (pieces are extrapolated otherwise).
    pub fn eval(&self, x: &PiRational) -> PiRational {
        self.segment(self.segment_index(x)).eval(x)
    }

    /// `±h_{[0,1];[c,d]} ∘ self ∘ +h_{[a,b];[s,e]}` where `[s,e]` is the own domain:
    /// the domain is moved affinely onto `[a,b]` and values `y` become `c + (d-c) y`
    /// (or `d - (d-c) y` when `increasing` is false).
    pub fn rescale(&self, a: &PiRational, b: &PiRational, c: &PiRational, d: &PiRational, increasing: bool) -> Self {
        let own = self.end() - self.start();
        let stretch = (b - a) / &own;
        let height = d - c;
        let xs = self.xs.iter().map(|x| a + &(&stretch * &(x - self.start()))).collect();
        let ys = self
            .ys
            .iter()
            .map(|y| if increasing { c + &(&height * y) } else { d - &(&height * y) })
            .collect();
        Self::build(xs, ys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> PiRational {
        PiRational::ratio(n, d)
    }

    #[test]
    fn merges_collinear_vertices() {
        let m = IntervalMap::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![r(0, 1), r(1, 2), r(1, 1)]).unwrap();
        assert_eq!(m.breakpoints().len(), 2);
        assert_eq!(m.eval(&r(1, 3)), r(1, 3));
    }

    #[test]
    fn rescale_examples() {
        let id = IntervalMap::new(vec![r(0, 1), r(1, 1)], vec![r(0, 1), r(1, 1)]).unwrap();
        let m = id.rescale(&r(1, 4), &r(1, 2), &r(0, 1), &r(1, 1), true);
        assert_eq!(m.eval(&r(3, 8)), r(1, 2));
        assert_eq!(m.slopes()[0], r(4, 1));
        let down = id.rescale(&r(0, 1), &r(1, 1), &r(0, 1), &r(1, 1), false);
        assert_eq!(down.eval(&r(1, 4)), r(3, 4));
    }
}
