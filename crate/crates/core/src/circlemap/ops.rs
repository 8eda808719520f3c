use num_bigint::BigInt;

use super::arc::{dist_to_integer, Arc, CirclePoint};
use super::lift::Lift;
use crate::error::{Error, Result};
use crate::exactnum::PiRational;

/// Merged, sorted breakpoints of two lifts on `[0, 1]`.
fn merged_breakpoints(f: &Lift, g: &Lift) -> Vec<PiRational> {
    let (a, b) = (f.breakpoints(), g.breakpoints());
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    i += 1;
                    x
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    y
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    x
                }
            },
            (Some(x), None) => {
                i += 1;
                x
            }
            (None, Some(y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next.clone());
    }
    out
}

/// Exact `sup_x d(f(x), g(x))` over the circle.
///
/// On each piece of the merged partition the lifted difference is affine, and the
/// distance to the nearest integer of an affine function peaks either at an
/// endpoint or where it crosses a half-integer.
pub fn sup_dist(f: &Lift, g: &Lift) -> PiRational {
    let half = PiRational::ratio(1, 2);
    let xs = merged_breakpoints(f, g);
    let diffs: Vec<PiRational> = xs.iter().map(|x| &f.eval(x) - &g.eval(x)).collect();
    let mut best = PiRational::zero();
    for w in diffs.windows(2) {
        let (lo, hi) = if w[0] <= w[1] { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
        // A half-integer in [lo, hi] exists iff floor(hi - 1/2) >= lo - 1/2.
        let k = (hi - &half).floor();
        if &(&PiRational::integer(k) + &half) >= lo {
            return half;
        }
        for d in [lo, hi] {
            let v = dist_to_integer(d);
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// The exact preimage of a closed arc, as maximal closed arcs (isolated points included).
pub fn preimage_arc(l: &Lift, a: &Arc) -> Result<Vec<Arc>> {
    if a.is_full() {
        return Ok(vec![Arc::full()]);
    }
    let (s, e) = a.lifted();
    let len = a.length().clone();
    let mut pieces: Vec<(PiRational, PiRational)> = Vec::new();
    for seg in l.segments() {
        let (m, big_m) = (seg.min_value(), seg.max_value());
        if seg.slope.is_zero() {
            if a.contains(&CirclePoint::new(seg.y0)) {
                return Err(Error::FlatPiece);
            }
            continue;
        }
        // Integers k with [s+k, e+k] meeting [m, M].
        let k_min = -((&e - m).floor());
        let k_max = (big_m - &s).floor();
        let mut k = k_min;
        while k <= k_max {
            let kk = PiRational::integer(k.clone());
            let lo_v = &s + &kk;
            let hi_v = &(&s + &len) + &kk;
            let lo = if &lo_v > m { lo_v } else { m.clone() };
            let hi = if &hi_v < big_m { hi_v } else { big_m.clone() };
            if lo <= hi {
                let (x0, x1) = (seg.solve(&lo), seg.solve(&hi));
                pieces.push(if x0 <= x1 { (x0, x1) } else { (x1, x0) });
            }
            k += 1;
        }
    }
    Ok(merge_intervals(pieces))
}

/// Union of closed intervals inside `[0, 1]`, turned into circle arcs.
pub(crate) fn merge_intervals(mut pieces: Vec<(PiRational, PiRational)>) -> Vec<Arc> {
    if pieces.is_empty() {
        return Vec::new();
    }
    pieces.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut merged: Vec<(PiRational, PiRational)> = Vec::new();
    for (lo, hi) in pieces {
        if let Some(last) = merged.last_mut() {
            if lo <= last.1 {
                if hi > last.1 {
                    last.1 = hi;
                }
                continue;
            }
        }
        merged.push((lo, hi));
    }
    let one = PiRational::one();
    if merged.len() == 1 && merged[0].0.is_zero() && merged[0].1 == one {
        return vec![Arc::full()];
    }
    // 0 and 1 are the same circle point.
    if merged.len() > 1 && merged[0].0.is_zero() && merged[merged.len() - 1].1 == one {
        let first = merged.remove(0);
        let last = merged.last_mut().unwrap();
        last.1 = &first.1 + &one;
    }
    let mut arcs: Vec<Arc> = merged.iter().map(|(lo, hi)| Arc::from_lifted(lo, hi)).collect();
    arcs.sort_by(|a, b| a.start().cmp(b.start()));
    arcs
}

/// The lift of `outer ∘ inner`, of degree `deg(outer) * deg(inner)`.
pub fn compose(outer: &Lift, inner: &Lift) -> Lift {
    let mut xs: Vec<PiRational> = Vec::new();
    let mut ys: Vec<PiRational> = Vec::new();
    for seg in inner.segments() {
        xs.push(seg.x0.clone());
        ys.push(outer.eval(seg.y0));
        if seg.slope.is_zero() {
            continue;
        }
        let (m, big_m) = (seg.min_value(), seg.max_value());
        let increasing = seg.y0 <= seg.y1;
        let mut crossings: Vec<PiRational> = Vec::new();
        let mut k = m.floor();
        let k_end = big_m.floor();
        while k <= k_end {
            let kk = PiRational::integer(k.clone());
            for t in outer.breakpoints() {
                let w = t + &kk;
                if &w > m && &w < big_m {
                    crossings.push(w);
                }
            }
            k += 1;
        }
        crossings.sort();
        crossings.dedup();
        if !increasing {
            crossings.reverse();
        }
        for w in crossings {
            xs.push(seg.solve(&w));
            ys.push(outer.eval(&w));
        }
    }
    let last = inner.values().last().unwrap();
    xs.push(PiRational::one());
    ys.push(outer.eval(last));
    Lift::new(xs, ys, outer.degree() * inner.degree()).expect("composition of lifts is a lift")
}

/// `h ∘ F` for an increasing homeomorphism `h` of the circle fixing 0.
pub fn compose_outer(h: &Lift, l: &Lift) -> Result<Lift> {
    if h.degree() != 1 || !h.values()[0].is_zero() || h.slopes().iter().any(|s| !s.is_positive()) {
        return Err(Error::NotHomeomorphism);
    }
    Ok(compose(h, l))
}

/// The lift of `x -> f(x + alpha)`.
pub fn rotate_domain(l: &Lift, alpha: &PiRational) -> Lift {
    if alpha.is_zero() {
        return l.clone();
    }
    let deg = BigInt::from(l.degree());
    let mut vertices: Vec<(PiRational, PiRational)> = vec![(PiRational::zero(), l.eval(alpha))];
    let n = l.breakpoints().len();
    for (t, v) in l.breakpoints()[..n - 1].iter().zip(l.values()) {
        let shifted = t - alpha;
        let k = shifted.floor();
        let x = &shifted - &PiRational::integer(k.clone());
        if x.is_zero() {
            continue;
        }
        vertices.push((x, v - &PiRational::integer(k * &deg)));
    }
    Lift::from_cyclic_vertices(&vertices, l.degree()).expect("rotated vertices are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> PiRational {
        PiRational::ratio(n, d)
    }

    fn c(n: i64, d: i64) -> CirclePoint {
        CirclePoint::new(&r(n, d))
    }

    fn doubling() -> Lift {
        Lift::linear(2, PiRational::zero())
    }

    fn beta3(x1: PiRational, x2: PiRational) -> Lift {
        Lift::new(vec![r(0, 1), x1, x2, r(1, 1)], vec![r(0, 1), r(1, 1), r(0, 1), r(1, 1)], 1).unwrap()
    }

    #[test]
    fn sup_dist_examples() {
        let d = doubling();
        assert_eq!(sup_dist(&d, &d), PiRational::zero());
        assert_eq!(sup_dist(&Lift::identity(), &Lift::rotation(&r(1, 8))), r(1, 8));
        let bumped = Lift::new(vec![r(0, 1), r(1, 3), r(1, 1)], vec![r(0, 1), &r(2, 3) + &r(1, 50), r(2, 1)], 2).unwrap();
        assert_eq!(sup_dist(&d, &bumped), r(1, 50));
        assert_eq!(sup_dist(&Lift::identity(), &Lift::rotation(&r(1, 2))), r(1, 2));
    }

    #[test]
    fn preimage_examples() {
        let half = Arc::new(&c(0, 1), &c(1, 2));
        let pre = preimage_arc(&doubling(), &half).unwrap();
        assert_eq!(pre, vec![Arc::new(&c(0, 1), &c(1, 4)), Arc::new(&c(1, 2), &c(3, 4))]);
        let a = Arc::new(&c(1, 5), &c(7, 10));
        assert_eq!(preimage_arc(&Lift::identity(), &a).unwrap(), vec![a]);
        // The three-lap map with vertices 0, 1/4, 1/2, 1: besides [0,1/8] the arc [3/8,3/4]
        // (two touching branch preimages) and the isolated point 1/4 whose value is 1 = 0.
        let pre = preimage_arc(&beta3(r(1, 4), r(1, 2)), &half).unwrap();
        assert_eq!(
            pre,
            vec![Arc::new(&c(0, 1), &c(1, 8)), Arc::point(&c(1, 4)), Arc::new(&c(3, 8), &c(3, 4))]
        );
    }

    #[test]
    fn preimage_wraps_through_zero() {
        let a = Arc::new(&c(9, 10), &c(1, 10));
        let pre = preimage_arc(&Lift::identity(), &a).unwrap();
        assert_eq!(pre, vec![a]);
    }

    #[test]
    fn compose_examples() {
        let h = Lift::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![r(0, 1), r(1, 4), r(1, 1)], 1).unwrap();
        let d = doubling();
        assert_eq!(compose_outer(&Lift::identity(), &d).unwrap(), d);
        assert_eq!(compose_outer(&h, &Lift::identity()).unwrap(), h);
        let g = compose_outer(&h, &d).unwrap();
        assert_eq!(g.degree(), 2);
        assert_eq!(g.eval(&r(1, 8)), r(1, 8));
        assert_eq!(g.eval(&r(5, 8)), r(9, 8));
        assert!(compose_outer(&Lift::rotation(&r(1, 3)), &d).is_err());
    }

    #[test]
    fn rotate_examples() {
        let l = beta3(r(1, 4), r(1, 2));
        assert_eq!(rotate_domain(&l, &PiRational::zero()), l);
        let alpha: PiRational = "pi - 3".parse().unwrap();
        let there = rotate_domain(&l, &alpha);
        assert_eq!(there.eval(&r(1, 10)), l.eval(&(&r(1, 10) + &alpha)));
        assert_eq!(rotate_domain(&there, &-&alpha), l);
        // Shifting right by pi - r puts rational breakpoints into Q + pi.
        let shift = rotate_domain(&l, &"3 - pi + 1/50".parse().unwrap());
        assert!(shift.breakpoints()[1..shift.breakpoints().len() - 1].iter().all(|t| t.in_q_pi()));
    }
}
