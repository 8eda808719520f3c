//! Pseudo-orbits and exact tracing: a nested-arc tracer driven by a certified
//! perturbed system, and a two-scale variant that hands over from a coarse system to a
//! finer one once the orbit's errors drop below the fine tolerance.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circlemap::{circle_dist, rotate_domain, sup_dist, Arc, CirclePoint, Lift};
use crate::error::{Error, Result};
use crate::exactnum::PiRational;
use crate::perturb::PerturbedSystem;

/// Orbit points produced by the generators lie on the grid `2^-GRID_BITS`.
pub const GRID_BITS: u32 = 48;

fn pow2_inv(k: u32) -> PiRational {
    PiRational::integer(BigInt::one() << k).recip().expect("nonzero")
}

/// A finite trajectory with the exact error of every step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoOrbit {
    pub points: Vec<CirclePoint>,
    /// `step_errors[k] = d(tau(x_k), x_{k+1})`.
    pub step_errors: Vec<PiRational>,
    pub claimed_delta: Option<PiRational>,
    /// Per-step thresholds for orbits whose errors shrink.
    pub schedule: Option<Vec<PiRational>>,
}

impl PseudoOrbit {
    pub fn from_points(tau: &Lift, points: Vec<CirclePoint>, claimed_delta: Option<PiRational>) -> Self {
        let step_errors = step_errors(tau, &points);
        PseudoOrbit { points, step_errors, claimed_delta, schedule: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_step_error(&self) -> PiRational {
        self.step_errors.iter().max().cloned().unwrap_or_else(PiRational::zero)
    }

    /// Recompute the errors under `tau` and check them against the stored claims.
    pub fn is_consistent(&self, tau: &Lift) -> bool {
        if step_errors(tau, &self.points) != self.step_errors {
            return false;
        }
        if let Some(d) = &self.claimed_delta {
            if self.step_errors.iter().any(|e| e >= d) {
                return false;
            }
        }
        if let Some(sched) = &self.schedule {
            if sched.len() < self.step_errors.len() || self.step_errors.iter().zip(sched).any(|(e, t)| e >= t) {
                return false;
            }
        }
        true
    }
}

fn step_errors(tau: &Lift, points: &[CirclePoint]) -> Vec<PiRational> {
    points.windows(2).map(|w| circle_dist(&tau.representative(&w[0]), &w[1])).collect()
}

/// How far along the grid each noisy step moves from the exact image.
pub trait NoiseModel {
    fn name(&self) -> &'static str;
    /// An integer offset in `[-max, max]`.
    fn offset(&self, rng: &mut ChaCha8Rng, max: i64) -> i64;
    /// Whether steps land on the exact image instead of the grid.
    fn exact(&self) -> bool {
        false
    }
}

pub struct ZeroNoise;

impl NoiseModel for ZeroNoise {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn offset(&self, _rng: &mut ChaCha8Rng, _max: i64) -> i64 {
        0
    }

    fn exact(&self) -> bool {
        true
    }
}

pub struct UniformNoise;

impl NoiseModel for UniformNoise {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn offset(&self, rng: &mut ChaCha8Rng, max: i64) -> i64 {
        rng.random_range(-max..=max)
    }
}

/// Always pushes as far as allowed, in a random direction.
pub struct EdgeNoise;

impl NoiseModel for EdgeNoise {
    fn name(&self) -> &'static str {
        "edge"
    }

    fn offset(&self, rng: &mut ChaCha8Rng, max: i64) -> i64 {
        if rng.random_bool(0.5) {
            max
        } else {
            -max
        }
    }
}

pub fn noise_models() -> Vec<Box<dyn NoiseModel>> {
    vec![Box::new(UniformNoise), Box::new(EdgeNoise), Box::new(ZeroNoise)]
}

pub fn noise_by_name(name: &str) -> Option<Box<dyn NoiseModel>> {
    noise_models().into_iter().find(|n| n.name() == name)
}

/// Per-step error thresholds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    Constant,
    /// `delta * 2^-(k / block)`, never below `floor` when one is given.
    Geometric { block: usize, floor: Option<PiRational> },
    Explicit(Vec<PiRational>),
}

impl Schedule {
    pub fn threshold(&self, k: usize, delta: &PiRational) -> PiRational {
        match self {
            Schedule::Constant => delta.clone(),
            Schedule::Geometric { block, floor } => {
                let t = delta * &pow2_inv((k / (*block).max(1)) as u32);
                match floor {
                    Some(f) if &t < f => f.clone(),
                    _ => t,
                }
            }
            Schedule::Explicit(v) => v.get(k).cloned().unwrap_or_else(|| v.last().cloned().unwrap_or_else(PiRational::zero)),
        }
    }
}

/// A grid point strictly within `bound` of `tau(x)`; the exact image when the grid is
/// too coarse for the bound.
fn noisy_step(tau: &Lift, x: &CirclePoint, bound: &PiRational, noise: &dyn NoiseModel, rng: &mut ChaCha8Rng) -> CirclePoint {
    let target = tau.representative(x);
    if noise.exact() {
        return target;
    }
    let scale = PiRational::integer(BigInt::one() << GRID_BITS);
    let cells = (bound * &scale).floor();
    let max = cells.to_i64().unwrap_or(i64::MAX) - 1;
    if max < 1 {
        return target;
    }
    let base = (target.coord() * &scale).floor();
    let mut j = noise.offset(rng, max);
    loop {
        let y = CirclePoint::new(&(&PiRational::integer(&base + j) / &scale));
        if &circle_dist(&y, &target) < bound {
            return y;
        }
        j -= j.signum();
        if j == 0 {
            let y = CirclePoint::new(&(&PiRational::integer(base.clone()) / &scale));
            return if &circle_dist(&y, &target) < bound { y } else { target };
        }
    }
}

/// A `delta`-pseudo orbit of `len` points with uniform grid noise.
pub fn gen_pseudo_orbit(tau: &Lift, x0: &CirclePoint, delta: &PiRational, len: usize, seed: u64) -> PseudoOrbit {
    gen_pseudo_orbit_with(tau, x0, delta, len, seed, &UniformNoise)
}

pub fn gen_pseudo_orbit_with(
    tau: &Lift,
    x0: &CirclePoint,
    delta: &PiRational,
    len: usize,
    seed: u64,
    noise: &dyn NoiseModel,
) -> PseudoOrbit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![x0.clone()];
    while points.len() < len {
        let next = noisy_step(tau, points.last().unwrap(), delta, noise, &mut rng);
        points.push(next);
    }
    let mut orbit = PseudoOrbit::from_points(tau, points, Some(delta.clone()));
    orbit.claimed_delta = Some(delta.clone());
    orbit
}

/// A pseudo orbit whose error at step `k` is below `schedule.threshold(k, delta)`.
pub fn gen_asymptotic_orbit(
    tau: &Lift,
    x0: &CirclePoint,
    delta: &PiRational,
    schedule: &Schedule,
    len: usize,
    seed: u64,
) -> Result<PseudoOrbit> {
    let thresholds: Vec<PiRational> = (0..len.saturating_sub(1)).map(|k| schedule.threshold(k, delta)).collect();
    if thresholds.first().is_some_and(|t| t > delta) {
        return Err(Error::InvalidParams("schedule starts above delta".into()));
    }
    if thresholds.windows(2).any(|w| w[1] > w[0]) || thresholds.iter().any(|t| !t.is_positive()) {
        return Err(Error::InvalidParams("schedule must be positive and nonincreasing".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![x0.clone()];
    for t in &thresholds {
        let next = noisy_step(tau, points.last().unwrap(), t, &UniformNoise, &mut rng);
        points.push(next);
    }
    let mut orbit = PseudoOrbit::from_points(tau, points, Some(delta.clone()));
    orbit.schedule = Some(thresholds);
    Ok(orbit)
}

/// Which end piece of an arc the chain sits in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndPiece {
    Left,
    Right,
}

/// How the tracing point is picked once the nested arcs are known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointChoice {
    /// Midpoint of the first nested arc.
    Midpoint,
    /// The exact minimizer of the largest forward error, found by bisection on the
    /// error bound. Meant for short horizons; the point need not lie in the first arc.
    Minimax,
}

/// Output of a tracing run.
#[derive(Clone, Debug)]
pub struct TraceResult {
    /// Lifted ends of `A_0, ..., A_H`, with `tau(A_s) = A_{s+1}` up to an integer shift.
    pub arc_ends: Vec<(PiRational, PiRational)>,
    /// The end pieces `Q_s` the chain was pulled back through.
    pub selected: Vec<Arc>,
    pub tracing_point: CirclePoint,
    pub forward_errors: Vec<PiRational>,
    pub horizon: usize,
    pub phase_switch: Option<usize>,
    /// Whether the two-scale handover needed the extra step.
    pub second_case: bool,
}

impl TraceResult {
    pub fn sup_error(&self) -> PiRational {
        self.forward_errors.iter().max().cloned().unwrap_or_else(PiRational::zero)
    }

    pub fn arc(&self, s: usize) -> Arc {
        let (lo, hi) = &self.arc_ends[s];
        Arc::from_lifted(lo, hi)
    }
}

/// Largest `2^-k` strictly below `x`, for `0 < x <= 1`.
fn dyadic_below(x: &PiRational) -> PiRational {
    let mut k = 1;
    while &pow2_inv(k) >= x {
        k += 1;
    }
    pow2_inv(k)
}

fn shift_values(l: &Lift, beta: &PiRational) -> Lift {
    let values = l.values().iter().map(|v| v + beta).collect();
    Lift::new(l.breakpoints().to_vec(), values, l.degree()).expect("shifting values keeps a lift")
}

/// Three maps within `delta` of `theta`: shifted after, shifted before, and both
/// in the opposite direction. Shifts are dyadic, so the maps stay piecewise affine
/// over the same coordinates.
pub fn nearby_maps(theta: &Lift, delta: &PiRational) -> Vec<(&'static str, Lift)> {
    let steepest = theta.slopes().iter().map(PiRational::abs).max().unwrap_or_else(PiRational::one);
    let beta = dyadic_below(&delta.half());
    let alpha = dyadic_below(&(&delta.half() / &steepest));
    let (half_beta, half_alpha) = (beta.half(), alpha.half());
    vec![
        ("post-shift", shift_values(theta, &beta)),
        ("pre-shift", rotate_domain(theta, &alpha)),
        ("both-back", shift_values(&rotate_domain(theta, &-&half_alpha), &-&half_beta)),
    ]
}

/// Precomputed images for tracing one map against one certified system.
pub struct Tracer<'a> {
    sys: &'a PerturbedSystem,
    tau: &'a Lift,
    /// `theta(J)` for every arc.
    images: Vec<Arc>,
    /// `tau(L1)` and `tau(R1)` for every arc.
    end_images: Vec<[Arc; 2]>,
    /// The map's graph over `L1` and `R1` of every arc.
    graphs: Vec<[PieceGraph; 2]>,
    start: EndPiece,
}

impl<'a> Tracer<'a> {
    /// Fails unless `tau` is within the system's `delta` of its map.
    pub fn new(sys: &'a PerturbedSystem, tau: &'a Lift) -> Result<Self> {
        let gap = sup_dist(tau, &sys.theta);
        if gap >= sys.delta {
            return Err(Error::Precondition(format!("map is {gap} from the system map, not below delta {}", sys.delta)));
        }
        let images = (0..sys.q.len()).map(|j| sys.image_of_arc(j)).collect();
        let end_images = sys
            .subdivisions
            .iter()
            .map(|sub| {
                let (a, b) = sub.piece_lifted(0);
                let (c, d) = sub.piece_lifted(4);
                [image(tau, a, b), image(tau, c, d)]
            })
            .collect();
        let graphs = sys
            .subdivisions
            .iter()
            .map(|sub| [PieceGraph::new(tau, &sub.l1()), PieceGraph::new(tau, &sub.r1())])
            .collect();
        Ok(Tracer { sys, tau, images, end_images, graphs, start: EndPiece::Left })
    }

    pub fn with_start(mut self, start: EndPiece) -> Self {
        self.start = start;
        self
    }

    pub fn system(&self) -> &PerturbedSystem {
        self.sys
    }

    fn piece(&self, arc: usize, end: EndPiece) -> Arc {
        match end {
            EndPiece::Left => self.sys.subdivisions[arc].l1(),
            EndPiece::Right => self.sys.subdivisions[arc].r1(),
        }
    }

    fn graph(&self, arc: usize, end: EndPiece) -> &PieceGraph {
        &self.graphs[arc][if end == EndPiece::Left { 0 } else { 1 }]
    }

    fn end_image(&self, arc: usize, end: EndPiece) -> &Arc {
        &self.end_images[arc][if end == EndPiece::Left { 0 } else { 1 }]
    }

    /// Arc and end piece for every index in `from..=to`, checking each covering step.
    fn chain(&self, orbit: &PseudoOrbit, from: usize, to: usize, first: EndPiece) -> Result<Vec<(usize, EndPiece)>> {
        let mut out = Vec::with_capacity(to - from + 1);
        let mut cur = (self.sys.q.locate(&orbit.points[from]), first);
        out.push(cur);
        for s in from..to {
            let next_arc = self.sys.q.locate(&orbit.points[s + 1]);
            let left = self.sys.subdivisions[next_arc].l1();
            let end = if self.images[cur.0].intersects(&left) { EndPiece::Left } else { EndPiece::Right };
            let target = self.piece(next_arc, end);
            if !self.end_image(cur.0, cur.1).contains_arc(&target) {
                return Err(Error::Covering {
                    step: s,
                    detail: format!("image of the end piece of arc {} misses the end piece of arc {next_arc}", cur.0),
                });
            }
            cur = (next_arc, end);
            out.push(cur);
        }
        Ok(out)
    }

    fn check_orbit(&self, orbit: &PseudoOrbit, horizon: usize, delta: &PiRational) -> Result<()> {
        if horizon >= orbit.len() {
            return Err(Error::Precondition(format!("horizon {horizon} needs more than {} points", orbit.len())));
        }
        if let Some(c) = &orbit.claimed_delta {
            if c > delta {
                return Err(Error::Precondition(format!("orbit claims delta {c}, above the certified C6 bound {delta}")));
            }
        }
        if let Some(k) = orbit.step_errors[..horizon].iter().position(|e| e >= delta) {
            return Err(Error::Precondition(format!("step {k} error is not below the certified C6 bound {delta}")));
        }
        Ok(())
    }

    /// Trace the first `horizon + 1` points of `orbit`.
    pub fn trace(&self, orbit: &PseudoOrbit, horizon: usize) -> Result<TraceResult> {
        self.trace_with(orbit, horizon, PointChoice::Midpoint)
    }

    pub fn trace_with(&self, orbit: &PseudoOrbit, horizon: usize, choice: PointChoice) -> Result<TraceResult> {
        self.check_orbit(orbit, horizon, &self.sys.delta)?;
        let chain = self.chain(orbit, 0, horizon, self.start)?;
        let selected: Vec<Arc> = chain.iter().map(|&(a, e)| self.piece(a, e)).collect();
        let graphs: Vec<&PieceGraph> = chain.iter().map(|&(a, e)| self.graph(a, e)).collect();
        finish_trace(self.tau, orbit, selected, &graphs, None, false, choice)
    }
}

fn image(f: &Lift, lo: &PiRational, hi: &PiRational) -> Arc {
    let (m, big_m) = f.image_interval(lo, hi);
    Arc::from_lifted(&m, &big_m)
}

fn finish_trace(
    tau: &Lift,
    orbit: &PseudoOrbit,
    selected: Vec<Arc>,
    graphs: &[&PieceGraph],
    phase_switch: Option<usize>,
    second_case: bool,
    choice: PointChoice,
) -> Result<TraceResult> {
    let horizon = graphs.len() - 1;
    let arc_ends = pull_back_ends(graphs)?;
    let mut z = CirclePoint::new(&arc_ends[0].0.midpoint(&arc_ends[0].1));
    if choice == PointChoice::Minimax {
        let bound = forward_errors(tau, &z, orbit, horizon).into_iter().max().unwrap();
        if let Some(better) = minimax_point(tau, orbit, horizon, &bound, 40)? {
            z = better;
        }
    }
    let errs = forward_errors(tau, &z, orbit, horizon);
    Ok(TraceResult { arc_ends, selected, tracing_point: z, forward_errors: errs, horizon, phase_switch, second_case })
}

/// The graph of a map over one arc, kept for repeated pullbacks through it.
#[derive(Clone, Debug)]
struct PieceGraph {
    verts: Vec<(PiRational, PiRational)>,
    slopes: Vec<PiRational>,
    min: PiRational,
    max: PiRational,
}

impl PieceGraph {
    fn new(tau: &Lift, within: &Arc) -> Self {
        let (lo, hi) = within.lifted();
        let verts = tau.vertices_between(&lo, &hi);
        let slopes = verts.windows(2).map(|w| tau.slope_between(&w[0].0, &w[1].0).clone()).collect();
        let min = verts.iter().map(|v| &v.1).min().unwrap().clone();
        let max = verts.iter().map(|v| &v.1).max().unwrap().clone();
        PieceGraph { verts, slopes, min, max }
    }
}

/// The leftmost subinterval of the piece that the map sends exactly onto the lifted
/// interval `target` (shifted by some integer), as lifted ends.
///
/// Ends are kept apart rather than as start and length: each end then grows by a few
/// bits per step, while sums of two long ends with unrelated denominators would double.
fn pull_back_one(g: &PieceGraph, target: &(PiRational, PiRational)) -> Option<(PiRational, PiRational)> {
    let (a, b) = target;
    // Smallest integer shift putting the target at or above the image's minimum.
    let k = -((a - &g.min).floor());
    let kk = PiRational::integer(k);
    let (a, b) = (a + &kk, b + &kk);
    if b > g.max {
        return None;
    }
    // Crossings of the two levels, in order along the arc.
    let mut events: Vec<(PiRational, bool)> = Vec::new();
    for (w, slope) in g.verts.windows(2).zip(&g.slopes) {
        let ((x0, y0), (_, y1)) = (&w[0], &w[1]);
        // On one segment the crossing order follows the slope sign; comparing the two
        // (nearly equal) crossings exactly would be expensive.
        let levels = if y1 >= y0 { [(&a, false), (&b, true)] } else { [(&b, true), (&a, false)] };
        for (level, is_top) in levels {
            let inside = (y0 <= level && level <= y1) || (y1 <= level && level <= y0);
            if !inside {
                continue;
            }
            let x = if y0 == y1 { x0.clone() } else { x0 + &(&(level - y0) / slope) };
            events.push((x, is_top));
        }
    }
    events.windows(2).find(|w| w[0].1 != w[1].1).map(|w| (w[0].0.clone(), w[1].0.clone()))
}

/// Nested lifted intervals inside the selected pieces, each mapped exactly onto the
/// next one.
fn pull_back_ends(graphs: &[&PieceGraph]) -> Result<Vec<(PiRational, PiRational)>> {
    let h = graphs.len() - 1;
    let last = &graphs[h].verts;
    let mut chain = vec![(last[0].0.clone(), last[last.len() - 1].0.clone())];
    for s in (0..h).rev() {
        let a = pull_back_one(graphs[s], chain.last().unwrap()).ok_or_else(|| Error::Covering {
            step: s,
            detail: "no branch of the map covers the next arc".into(),
        })?;
        chain.push(a);
    }
    chain.reverse();
    Ok(chain)
}

/// Nested arcs `A_s` inside the selected pieces with `tau(A_s) = A_{s+1}`.
pub fn pull_back(tau: &Lift, selected: &[Arc]) -> Result<Vec<Arc>> {
    let graphs: Vec<PieceGraph> = selected.iter().map(|a| PieceGraph::new(tau, a)).collect();
    let refs: Vec<&PieceGraph> = graphs.iter().collect();
    Ok(pull_back_ends(&refs)?.iter().map(|(lo, hi)| Arc::from_lifted(lo, hi)).collect())
}

/// `d(tau^s(z), x_s)` for `s = 0..=horizon`.
pub fn forward_errors(tau: &Lift, z: &CirclePoint, orbit: &PseudoOrbit, horizon: usize) -> Vec<PiRational> {
    let mut out = Vec::with_capacity(horizon + 1);
    let mut cur = z.clone();
    for s in 0..=horizon {
        out.push(circle_dist(&cur, &orbit.points[s]));
        if s < horizon {
            cur = tau.representative(&cur);
        }
    }
    out
}

/// Verdicts of an independent forward check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceReport {
    pub forward_errors: Vec<PiRational>,
    pub sup_error: PiRational,
    pub within_eps: bool,
    /// Whether every error past the given index is below the given bound.
    pub tail_ok: Option<bool>,
}

impl TraceReport {
    pub fn passed(&self) -> bool {
        self.within_eps && self.tail_ok.unwrap_or(true)
    }
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sup error {} ({:.3e}); within eps: {}", self.sup_error, self.sup_error.to_f64(), self.within_eps)?;
        if let Some(t) = self.tail_ok {
            write!(f, "; tail: {t}")?;
        }
        Ok(())
    }
}

/// Recompute `d(tau^s(z), x_s)` over the whole orbit and check the bounds.
pub fn verify_trace(
    tau: &Lift,
    z: &CirclePoint,
    orbit: &PseudoOrbit,
    eps: &PiRational,
    tail: Option<(usize, &PiRational)>,
) -> TraceReport {
    let errs = forward_errors(tau, z, orbit, orbit.len() - 1);
    let sup = errs.iter().max().cloned().unwrap_or_else(PiRational::zero);
    let within_eps = &sup < eps;
    let tail_ok = tail.map(|(n, beta)| errs.iter().skip(n + 1).all(|e| e < beta));
    TraceReport { forward_errors: errs, sup_error: sup, within_eps, tail_ok }
}

/// First index `N >= 1` with every step error from `N - 1` on below `gamma`.
pub fn switch_index(orbit: &PseudoOrbit, horizon: usize, gamma: &PiRational) -> Option<usize> {
    let errs = &orbit.step_errors[..horizon];
    match errs.iter().rposition(|e| e >= gamma) {
        None => Some(1),
        Some(k) if k + 1 < horizon => Some(k + 2),
        Some(_) => None,
    }
}

/// Trace with a coarse system until the orbit is fine enough, then hand over to the
/// fine system.
pub fn slimit_trace(
    coarse: &Tracer<'_>,
    fine: &Tracer<'_>,
    orbit: &PseudoOrbit,
    horizon: usize,
) -> Result<TraceResult> {
    slimit_trace_with(coarse, fine, orbit, horizon, PointChoice::Midpoint)
}

pub fn slimit_trace_with(
    coarse: &Tracer<'_>,
    fine: &Tracer<'_>,
    orbit: &PseudoOrbit,
    horizon: usize,
    choice: PointChoice,
) -> Result<TraceResult> {
    let (cs, fs) = (coarse.sys, fine.sys);
    if !std::ptr::eq(coarse.tau, fine.tau) && coarse.tau != fine.tau {
        return Err(Error::Precondition("both tracers must use the same map".into()));
    }
    let tau = coarse.tau;
    let beta = fs.mesh();
    let gamma = fs.delta.clone();
    if beta.scale(&BigInt::from(4), &BigInt::one()) >= cs.delta {
        return Err(Error::ScaleGap("4 * fine mesh < coarse delta"));
    }
    if gamma >= beta {
        return Err(Error::ScaleGap("fine delta < fine mesh"));
    }
    if !fs.q.refines(&cs.q) {
        return Err(Error::Precondition("fine partition does not refine the coarse one".into()));
    }
    coarse.check_orbit(orbit, horizon, &cs.delta)?;
    let n = switch_index(orbit, horizon, &gamma).ok_or(Error::NeverFine)?;
    let coarse_to = (n + 1).min(horizon);
    let coarse_chain = coarse.chain(orbit, 0, coarse_to, coarse.start)?;
    let fine_chain = fine.chain(orbit, n - 1, horizon, fine.start)?;
    let coarse_piece = |s: usize| coarse.piece(coarse_chain[s].0, coarse_chain[s].1);
    let fine_piece = |s: usize| fine.piece(fine_chain[s - (n - 1)].0, fine_chain[s - (n - 1)].1);

    let image_of = |a: &Arc| {
        let (lo, hi) = a.lifted();
        image(tau, &lo, &hi)
    };
    // First case: the fine piece at N sits inside the coarse end piece there, which the
    // coarse chain already covers. Otherwise it lies in the middle of its coarse arc and
    // the handover moves one step later.
    let (switch, second) = if n > horizon || coarse_piece(n).contains_arc(&fine_piece(n)) {
        (n, false)
    } else {
        (n + 1, true)
    };
    if switch <= horizon && !image_of(&coarse_piece(switch - 1)).contains_arc(&fine_piece(switch)) {
        return Err(Error::Covering { step: switch - 1, detail: "handover step is not covered".into() });
    }
    let mut selected: Vec<Arc> = (0..switch.min(horizon + 1)).map(coarse_piece).collect();
    selected.extend((switch..=horizon).map(fine_piece));
    let mut graphs: Vec<&PieceGraph> =
        (0..switch.min(horizon + 1)).map(|s| coarse.graph(coarse_chain[s].0, coarse_chain[s].1)).collect();
    graphs.extend((switch..=horizon).map(|s| fine.graph(fine_chain[s - (n - 1)].0, fine_chain[s - (n - 1)].1)));
    finish_trace(tau, orbit, selected, &graphs, Some(switch), second, choice)
}

/// An orbit for which the handover needs the extra step: its last large error comes
/// just before a point in the middle piece of a coarse arc, so the fine piece there is
/// not inside a coarse end piece.
pub fn adversarial_orbit(coarse: &Tracer<'_>, fine: &Tracer<'_>, len: usize, seed: u64) -> Result<Option<PseudoOrbit>> {
    let cs = coarse.sys;
    let tau = coarse.tau;
    let kick = cs.delta.half();
    let tail_delta = &fine.sys.delta * &(PiRational::one() - pow2_inv(8));
    for sub in &cs.subdivisions {
        let (lo, hi) = sub.middle().lifted();
        let x2 = CirclePoint::new(&lo.midpoint(&hi));
        let Some(x1) = some_preimage(tau, &x2) else { continue };
        let y = CirclePoint::new(&(x1.coord() - &kick));
        let Some(x0) = some_preimage(tau, &y) else { continue };
        let tail = gen_asymptotic_orbit(tau, &x2, &tail_delta, &Schedule::Geometric { block: 8, floor: None }, len - 2, seed)?;
        let mut points = vec![x0, x1];
        points.extend(tail.points);
        let mut orbit = PseudoOrbit::from_points(tau, points, Some(cs.delta.clone()));
        let mut sched = vec![cs.delta.clone(), tail_delta.clone()];
        sched.extend(tail.schedule.unwrap_or_default());
        orbit.schedule = Some(sched);
        if slimit_trace(coarse, fine, &orbit, len - 1).is_ok_and(|res| res.second_case) {
            return Ok(Some(orbit));
        }
    }
    Ok(None)
}

/// Some point mapped onto `y`.
pub fn some_preimage(tau: &Lift, y: &CirclePoint) -> Option<CirclePoint> {
    for seg in tau.segments() {
        if seg.slope.is_zero() {
            continue;
        }
        let (m, big_m) = (seg.min_value(), seg.max_value());
        let k = -((y.coord() - m).floor());
        let level = y.coord() + &PiRational::integer(k);
        if &level <= big_m {
            return Some(CirclePoint::new(&seg.solve(&level)));
        }
    }
    None
}

/// Smallest largest-error over grid starting points `k / grid`, skipping a candidate as
/// soon as it cannot beat the best so far.
pub fn brute_force_min_error(tau: &Lift, orbit: &PseudoOrbit, horizon: usize, grid: u64) -> PiRational {
    let mut best = PiRational::one();
    for k in 0..grid {
        let z = CirclePoint::new(&PiRational::ratio(k as i64, grid as i64));
        let mut cur = z;
        let mut worst = PiRational::zero();
        let mut beaten = false;
        for s in 0..=horizon {
            let e = circle_dist(&cur, &orbit.points[s]);
            if e >= best {
                beaten = true;
                break;
            }
            if e > worst {
                worst = e;
            }
            if s < horizon {
                cur = tau.representative(&cur);
            }
        }
        if !beaten {
            best = worst;
        }
    }
    best
}

/// Closed arcs of the intersection of two closed arcs.
fn intersect(a: &Arc, b: &Arc) -> Vec<Arc> {
    if a.is_full() {
        return vec![b.clone()];
    }
    if b.is_full() {
        return vec![a.clone()];
    }
    let mut out = Vec::new();
    let (alo, ahi) = a.lifted();
    let (blo, bhi) = b.lifted();
    let one = PiRational::one();
    for shift in [-&one, PiRational::zero(), one.clone()] {
        let (lo, hi) = (&blo + &shift, &bhi + &shift);
        let l = if lo > alo { lo } else { alo.clone() };
        let h = if hi < ahi { hi } else { ahi.clone() };
        if l <= h {
            out.push(Arc::from_lifted(&l, &h));
        }
    }
    out
}

fn merge_arcs(mut arcs: Vec<Arc>) -> Vec<Arc> {
    arcs.sort_by(|x, y| x.start().cmp(y.start()));
    let mut out: Vec<Arc> = Vec::new();
    for a in arcs {
        if let Some(last) = out.last_mut() {
            if last.contains_arc(&a) {
                continue;
            }
            if last.intersects(&a) && !a.contains_arc(last) {
                let (lo, _) = last.lifted();
                let (alo, ahi) = a.lifted();
                let shift = if alo < lo { PiRational::one() } else { PiRational::zero() };
                *last = Arc::from_lifted(&lo, &(&ahi + &shift));
                continue;
            }
        }
        out.push(a);
    }
    out
}

/// Sets `S_s` of points `tau^s(z)` over all `z` whose first `s` errors are at most `b`.
fn feasible_sets(tau: &Lift, orbit: &PseudoOrbit, horizon: usize, b: &PiRational) -> Option<Vec<Vec<Arc>>> {
    let ball = |x: &CirclePoint| Arc::from_lifted(&(x.coord() - b), &(x.coord() + b));
    let mut sets = vec![vec![ball(&orbit.points[0])]];
    for s in 1..=horizon {
        let target = ball(&orbit.points[s]);
        let mut next = Vec::new();
        for a in sets.last().unwrap() {
            let (lo, hi) = a.lifted();
            next.extend(intersect(&image(tau, &lo, &hi), &target));
        }
        let next = merge_arcs(next);
        if next.is_empty() {
            return None;
        }
        sets.push(next);
    }
    Some(sets)
}

/// A point whose orbit stays within the smallest achievable error bound, found by
/// `rounds` bisection steps on the bound below `upper`.
pub fn minimax_point(
    tau: &Lift,
    orbit: &PseudoOrbit,
    horizon: usize,
    upper: &PiRational,
    rounds: u32,
) -> Result<Option<CirclePoint>> {
    let mut lo = PiRational::zero();
    let mut hi = upper.clone();
    let mut best = feasible_sets(tau, orbit, horizon, &hi);
    if best.is_none() {
        return Ok(None);
    }
    for _ in 0..rounds {
        let mid = lo.midpoint(&hi);
        match feasible_sets(tau, orbit, horizon, &mid) {
            Some(sets) => {
                hi = mid;
                best = Some(sets);
            }
            None => lo = mid,
        }
    }
    let sets = best.unwrap();
    // Walk back from a point of the last set through exact preimages.
    let mut y = sets[horizon][0].start().clone();
    for s in (0..horizon).rev() {
        let mut found = None;
        for a in &sets[s] {
            if let Some(x) = preimage_in(tau, a, &y) {
                found = Some(x);
                break;
            }
        }
        y = found.ok_or_else(|| Error::Covering { step: s, detail: "feasible set lost its preimage".into() })?;
    }
    Ok(Some(y))
}

/// A point of the arc `within` mapped onto `y`.
fn preimage_in(tau: &Lift, within: &Arc, y: &CirclePoint) -> Option<CirclePoint> {
    let level = (y.coord().clone(), y.coord().clone());
    pull_back_one(&PieceGraph::new(tau, within), &level).map(|(x, _)| CirclePoint::new(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::perturb_pipeline;
    use crate::seeds::{DoublingConjugate, SeedMap};

    fn r(n: i64, d: i64) -> PiRational {
        PiRational::ratio(n, d)
    }

    fn system() -> PerturbedSystem {
        perturb_pipeline(&DoublingConjugate.build().unwrap(), &r(1, 5)).unwrap()
    }

    #[test]
    fn zero_noise_gives_true_orbit() {
        let sys = system();
        let x0 = CirclePoint::new(&r(1, 3));
        let orbit = gen_pseudo_orbit_with(&sys.theta, &x0, &r(1, 1000), 30, 1, &ZeroNoise);
        assert!(orbit.step_errors.iter().all(|e| e.is_zero()));
        assert!(orbit.is_consistent(&sys.theta));
    }

    #[test]
    fn seeded_orbits_repeat() {
        let sys = system();
        let x0 = CirclePoint::new(&r(1, 3));
        let a = gen_pseudo_orbit(&sys.theta, &x0, &sys.delta, 50, 9);
        let b = gen_pseudo_orbit(&sys.theta, &x0, &sys.delta, 50, 9);
        assert_eq!(a, b);
        assert!(a.is_consistent(&sys.theta));
        assert!(a.max_step_error() < sys.delta);
    }

    #[test]
    fn geometric_schedule_is_respected() {
        let sys = system();
        let sched = Schedule::Geometric { block: 10, floor: None };
        let orbit = gen_asymptotic_orbit(&sys.theta, &CirclePoint::new(&r(2, 7)), &sys.delta, &sched, 200, 3).unwrap();
        assert!(orbit.is_consistent(&sys.theta));
        assert!(orbit.step_errors[150] < &sys.delta * &pow2_inv(14));
    }

    #[test]
    fn traces_true_and_noisy_orbits() {
        let sys = system();
        let tracer = Tracer::new(&sys, &sys.theta).unwrap();
        let x0 = CirclePoint::new(&r(2, 7));
        let truth = gen_pseudo_orbit_with(&sys.theta, &x0, &sys.delta, 60, 0, &ZeroNoise);
        let res = tracer.trace(&truth, 59).unwrap();
        assert!(res.sup_error() < sys.mesh());
        let delta = &sys.delta * &(PiRational::one() - pow2_inv(8));
        let noisy = gen_pseudo_orbit(&sys.theta, &x0, &delta, 200, 5);
        let res = tracer.trace(&noisy, 199).unwrap();
        assert!(res.sup_error() < sys.mesh());
        assert!(res.arc(0).contains(&res.tracing_point));
        let report = verify_trace(&sys.theta, &res.tracing_point, &noisy, &sys.mesh(), None);
        assert!(report.passed());
    }

    #[test]
    fn tracer_rejects_large_delta() {
        let sys = system();
        let tracer = Tracer::new(&sys, &sys.theta).unwrap();
        let orbit = gen_pseudo_orbit(&sys.theta, &CirclePoint::new(&r(1, 5)), &sys.eta, 20, 1);
        assert!(matches!(tracer.trace(&orbit, 19), Err(Error::Precondition(_))));
    }

    #[test]
    fn moved_start_fails_verification() {
        let sys = system();
        let x0 = CirclePoint::new(&r(2, 7));
        let truth = gen_pseudo_orbit_with(&sys.theta, &x0, &sys.delta, 40, 0, &ZeroNoise);
        let eps = sys.mesh();
        let report = verify_trace(&sys.theta, &x0, &truth, &eps, None);
        assert!(report.passed() && report.sup_error.is_zero());
        let moved = CirclePoint::new(&(x0.coord() + &eps.scale(&BigInt::from(2), &BigInt::one())));
        assert!(!verify_trace(&sys.theta, &moved, &truth, &eps, None).passed());
    }

    #[test]
    fn minimax_beats_grid_on_short_orbit() {
        let sys = system();
        let tracer = Tracer::new(&sys, &sys.theta).unwrap();
        let delta = &sys.delta * &(PiRational::one() - pow2_inv(8));
        let orbit = gen_pseudo_orbit(&sys.theta, &CirclePoint::new(&r(3, 11)), &delta, 8, 2);
        let res = tracer.trace_with(&orbit, 7, PointChoice::Minimax).unwrap();
        let grid = brute_force_min_error(&sys.theta, &orbit, 7, 2000);
        assert!(res.sup_error() <= &grid + &r(1, 2000));
    }
}
