//! The two-stage perturbation: each affine piece of a preserving map is first replaced
//! by a many-lap zigzag, then each piece of the zigzag by a boundary-pinch map. The
//! result comes with an arc partition, a five-piece split of every arc and the
//! constants that the tracer needs.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::circlemap::{sup_dist, Arc, CirclePoint, Lift};
use crate::error::{Error, Result};
use crate::exactnum::PiRational;
use crate::families::{PsiParams, PsiPoints};
use crate::measure::is_preserving;

/// Cyclically ordered points of the circle, all of the form `q + pi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    points: Vec<PiRational>,
}

impl Partition {
    pub fn new(points: Vec<PiRational>) -> Result<Self> {
        let mut pts: Vec<PiRational> = points.iter().map(PiRational::mod1).collect();
        if let Some(bad) = pts.iter().find(|p| !p.in_q_pi()) {
            return Err(Error::NotNormalForm(format!("partition point {bad} is not of the form q + pi")));
        }
        pts.sort();
        if pts.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("partition points must be distinct".into()));
        }
        if pts.len() < 2 {
            return Err(Error::InvalidParams("a partition needs at least two points".into()));
        }
        Ok(Partition { points: pts })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PiRational] {
        &self.points
    }

    pub fn point(&self, i: usize) -> CirclePoint {
        CirclePoint::new(&self.points[i % self.len()])
    }

    /// Arc `i` lifted to `[p_i, p_{i+1}]`; the last arc ends at `p_0 + 1`.
    pub fn lifted(&self, i: usize) -> (PiRational, PiRational) {
        let n = self.len();
        let lo = self.points[i].clone();
        let hi = if i + 1 < n { self.points[i + 1].clone() } else { &self.points[0] + &PiRational::one() };
        (lo, hi)
    }

    pub fn arc(&self, i: usize) -> Arc {
        let (lo, hi) = self.lifted(i);
        Arc::from_lifted(&lo, &hi)
    }

    pub fn arc_length(&self, i: usize) -> PiRational {
        let (lo, hi) = self.lifted(i);
        &hi - &lo
    }

    /// Largest arc length.
    pub fn mesh(&self) -> PiRational {
        (0..self.len()).map(|i| self.arc_length(i)).max().expect("non-empty partition")
    }

    /// Index of the arc containing `x`; a partition point belongs to the arc it starts.
    pub fn locate(&self, x: &CirclePoint) -> usize {
        match self.points.binary_search(x.coord()) {
            Ok(i) => i,
            Err(0) => self.len() - 1,
            Err(i) => i - 1,
        }
    }

    pub fn contains_point(&self, x: &PiRational) -> bool {
        self.points.binary_search(&x.mod1()).is_ok()
    }

    /// Whether every point of `coarse` is a point of `self`.
    pub fn refines(&self, coarse: &Partition) -> bool {
        coarse.points.iter().all(|p| self.points.binary_search(p).is_ok())
    }

    /// Arcs sharing at least one point with the closed arc `a`, in counterclockwise order
    /// from the one containing its start.
    pub fn arcs_meeting(&self, a: &Arc) -> Vec<usize> {
        let n = self.len();
        if a.is_full() {
            return (0..n).collect();
        }
        let (lo, hi) = a.lifted();
        let first = self.locate(a.start());
        let mut out = vec![first];
        // Lifted start of the next arc after `first`, aligned with `lo`.
        let (first_lo, first_hi) = self.lifted(first);
        let mut next_start = if first_lo > lo { &first_hi - &PiRational::one() } else { first_hi };
        let mut i = first;
        while out.len() < n && next_start <= hi {
            i = (i + 1) % n;
            out.push(i);
            next_start = &next_start + &self.arc_length(i);
        }
        out
    }

    /// Count of points strictly inside the open arc of lifted interval `(lo, lo + len)`.
    fn count_inside(&self, lo: &PiRational, len: &PiRational) -> usize {
        let start = lo.mod1();
        let end = &start + len;
        let one = PiRational::one();
        let upper = |x: &PiRational| self.points.partition_point(|p| p < x);
        let after = |x: &PiRational| self.points.partition_point(|p| p <= x);
        if end <= one {
            upper(&end).saturating_sub(after(&start))
        } else {
            (self.len() - after(&start)) + upper(&(&end - &one))
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The five consecutive pieces `L1, L2, M, R2, R1` of one arc, stored by the six lifted
/// boundary coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcSubdivision {
    bounds: [PiRational; 6],
}

impl ArcSubdivision {
    /// Split the lifted arc `[lo, hi]` at the normalized positions `c < d < e < f`.
    pub fn from_fractions(lo: &PiRational, hi: &PiRational, cuts: [&PiRational; 4]) -> Self {
        let len = hi - lo;
        let at = |t: &PiRational| lo + &(&len * t);
        ArcSubdivision { bounds: [lo.clone(), at(cuts[0]), at(cuts[1]), at(cuts[2]), at(cuts[3]), hi.clone()] }
    }

    pub fn bounds(&self) -> &[PiRational; 6] {
        &self.bounds
    }

    /// Lifted ends of piece `k` (0 = L1, 1 = L2, 2 = M, 3 = R2, 4 = R1).
    pub fn piece_lifted(&self, k: usize) -> (&PiRational, &PiRational) {
        (&self.bounds[k], &self.bounds[k + 1])
    }

    pub fn piece(&self, k: usize) -> Arc {
        Arc::from_lifted(&self.bounds[k], &self.bounds[k + 1])
    }

    pub fn l1(&self) -> Arc {
        self.piece(0)
    }

    pub fn r1(&self) -> Arc {
        self.piece(4)
    }

    /// `L1 ∪ L2`.
    pub fn left_pair(&self) -> Arc {
        Arc::from_lifted(&self.bounds[0], &self.bounds[2])
    }

    /// `R2 ∪ R1`.
    pub fn right_pair(&self) -> Arc {
        Arc::from_lifted(&self.bounds[3], &self.bounds[5])
    }

    /// `L2 ∪ M ∪ R2`.
    pub fn middle(&self) -> Arc {
        Arc::from_lifted(&self.bounds[1], &self.bounds[4])
    }

    pub fn min_piece_length(&self) -> PiRational {
        (0..5).map(|k| &self.bounds[k + 1] - &self.bounds[k]).min().unwrap()
    }
}

/// A perturbed map together with everything the tracer relies on.
#[derive(Clone, Debug)]
pub struct PerturbedSystem {
    pub theta: Lift,
    pub sigma: Lift,
    pub p: Partition,
    pub q: Partition,
    pub subdivisions: Vec<ArcSubdivision>,
    pub psi: Vec<PsiParams>,
    pub eta: PiRational,
    pub delta: PiRational,
    pub label: String,
    pub eps: Option<PiRational>,
    /// `sup_dist(g, theta)` for the map the system was built from.
    pub source_dist: Option<PiRational>,
}

impl PerturbedSystem {
    pub fn mesh(&self) -> PiRational {
        self.q.mesh()
    }

    /// Every subdivision boundary point, including the partition points.
    pub fn subdivision_points(&self) -> Vec<PiRational> {
        self.subdivisions.iter().flat_map(|s| s.bounds[..5].iter().map(PiRational::mod1)).collect()
    }

    /// All ten pinch-map vertices of every arc, pulled back to the circle.
    pub fn pinch_vertices(&self) -> Vec<PiRational> {
        let mut out = Vec::new();
        for (i, params) in self.psi.iter().enumerate() {
            let (lo, hi) = self.q.lifted(i);
            let len = &hi - &lo;
            for t in psi_fractions(&params.points()) {
                out.push((&lo + &(&len * &t)).mod1());
            }
        }
        out
    }

    /// The image arc `theta(J)` of arc `j` of `q`.
    pub fn image_of_arc(&self, j: usize) -> Arc {
        let (lo, hi) = self.q.lifted(j);
        image_arc(&self.theta, &lo, &hi)
    }
}

fn psi_fractions(p: &PsiPoints) -> [PiRational; 10] {
    [
        p.a.clone(),
        p.a_prime.clone(),
        p.b_prime.clone(),
        p.c_prime.clone(),
        p.d.clone(),
        p.e.clone(),
        p.f_prime.clone(),
        p.g_prime.clone(),
        p.h_prime.clone(),
        p.h.clone(),
    ]
}

/// `f([lo, hi])` as a circle arc.
pub fn image_arc(f: &Lift, lo: &PiRational, hi: &PiRational) -> Arc {
    let (m, big_m) = f.image_interval(lo, hi);
    Arc::from_lifted(&m, &big_m)
}

fn pow2_inv(k: u32) -> PiRational {
    PiRational::integer(BigInt::one() << k).recip().expect("nonzero")
}

fn check_normal_form(g: &Lift) -> Result<Vec<PiRational>> {
    let kinks: Vec<PiRational> = g.deriv_discontinuities().into_iter().map(CirclePoint::into_coord).collect();
    if let Some(bad) = kinks.iter().find(|k| !k.in_q_pi()) {
        return Err(Error::NotNormalForm(format!("kink at {bad} is not of the form q + pi")));
    }
    if let Some(bad) = g.slopes().iter().find(|s| !s.is_rational()) {
        return Err(Error::NotNormalForm(format!("slope {bad} is not rational")));
    }
    Ok(kinks)
}

/// A partition containing every kink of `g`, subdivided until the mesh is below `eps`.
pub fn affine_partition(g: &Lift, eps: &PiRational) -> Result<Partition> {
    affine_partition_with(g, eps, &[], None)
}

/// Like [`affine_partition`], also containing `required` and, when `max_image` is given,
/// with every arc's image no longer than it.
pub fn affine_partition_with(
    g: &Lift,
    eps: &PiRational,
    required: &[PiRational],
    max_image: Option<&PiRational>,
) -> Result<Partition> {
    if !eps.is_positive() {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let mut base = check_normal_form(g)?;
    base.extend(required.iter().map(PiRational::mod1));
    if let Some(bad) = base.iter().find(|k| !k.in_q_pi()) {
        return Err(Error::NotNormalForm(format!("required point {bad} is not of the form q + pi")));
    }
    base.sort();
    base.dedup();
    if base.is_empty() {
        base.push(PiRational::pi() - PiRational::integer(3));
    }
    let one = PiRational::one();
    let n = base.len();
    let mut points = Vec::new();
    for i in 0..n {
        let lo = base[i].clone();
        let hi = if i + 1 < n { base[i + 1].clone() } else { &base[0] + &one };
        let len = &hi - &lo;
        let rise = (&g.eval(&hi) - &g.eval(&lo)).abs();
        // Fewer than three points overall would leave a degenerate cyclic order.
        let mut m: i64 = if n < 3 { (3 + n as i64 - 1) / n as i64 } else { 1 };
        loop {
            let mm = PiRational::integer(m);
            let short = &len / &mm < *eps;
            let low = max_image.is_none_or(|cap| &rise / &mm <= *cap);
            if short && low {
                break;
            }
            m += 1;
        }
        points.push(lo.clone());
        for k in 1..m {
            points.push(&lo + &len.scale(&BigInt::from(k), &BigInt::from(m)));
        }
    }
    let part = Partition::new(points)?;
    if let Some(bad) = part.points.iter().find(|p| !g.eval(p).is_rational()) {
        return Err(Error::NotNormalForm(format!("value at {bad} is not rational")));
    }
    Ok(part)
}

/// Lap points of every arc of `p` for the given lap counts, as a partition.
fn lap_partition(p: &Partition, laps: &[usize]) -> Result<Partition> {
    let mut pts = Vec::new();
    for i in 0..p.len() {
        let (lo, hi) = p.lifted(i);
        let len = &hi - &lo;
        let n = laps[i] as i64;
        for k in 0..n {
            pts.push(&lo + &len.scale(&BigInt::from(k), &BigInt::from(n)));
        }
    }
    Partition::new(pts)
}

/// The first `P`-arc whose image holds fewer than two points of `q` in its interior.
fn covering_failure(g: &Lift, p: &Partition, q: &Partition) -> Option<usize> {
    let one = PiRational::one();
    (0..p.len()).find(|&i| {
        let (lo, hi) = p.lifted(i);
        let (a, b) = (g.eval(&lo), g.eval(&hi));
        let (m, big_m) = if a <= b { (a, b) } else { (b, a) };
        let len = &big_m - &m;
        len < one && q.count_inside(&m, &len) < 2
    })
}

/// Smallest odd lap count, the same on every arc, giving the covering property.
pub fn default_laps(g: &Lift, p: &Partition) -> Result<Vec<usize>> {
    let mut n = 1;
    while n <= 1001 {
        let laps = vec![n; p.len()];
        let q = lap_partition(p, &laps)?;
        if covering_failure(g, p, &q).is_none() {
            return Ok(laps);
        }
        n += 2;
    }
    Err(Error::IncreaseLaps { arc: 0, min_laps: n })
}

/// Replace `g` on every arc of `p` by a zigzag with the given (odd) number of laps
/// running between the arc's end values.
pub fn sigma_step(g: &Lift, p: &Partition, laps: &[usize]) -> Result<(Lift, Partition)> {
    if laps.len() != p.len() {
        return Err(Error::InvalidParams(format!("{} lap counts for {} arcs", laps.len(), p.len())));
    }
    if let Some(i) = laps.iter().position(|n| n % 2 == 0) {
        return Err(Error::InvalidParams(format!("arc {i}: lap count must be odd")));
    }
    let kinks = g.deriv_discontinuities();
    if let Some(k) = kinks.iter().find(|k| !p.contains_point(k.coord())) {
        return Err(Error::Precondition(format!("map has a kink at {k} inside an arc")));
    }
    let mut vertices = Vec::new();
    for i in 0..p.len() {
        let (lo, hi) = p.lifted(i);
        let (a, b) = (g.eval(&lo), g.eval(&hi));
        let len = &hi - &lo;
        let n = laps[i] as i64;
        for k in 0..n {
            let x = &lo + &len.scale(&BigInt::from(k), &BigInt::from(n));
            vertices.push((x, if k % 2 == 0 { a.clone() } else { b.clone() }));
        }
    }
    let sigma = Lift::from_cyclic_vertices(&vertices, g.degree())?;
    let q = lap_partition(p, laps)?;
    if let Some(arc) = covering_failure(g, p, &q) {
        let min_laps = default_laps(g, p).map(|l| l[0]).unwrap_or(laps[arc] + 2);
        return Err(Error::IncreaseLaps { arc, min_laps });
    }
    Ok((sigma, q))
}

/// Pinch parameters for every arc of `q`: with `w = 2^-j / 5` for the smallest `j` that
/// keeps every image point `sigma(q)` falling in the arc strictly inside its middle band,
/// the band is `[w, 1 - w]` and the outer pieces scale with `w`.
pub fn default_psi_params(sigma: &Lift, q: &Partition) -> Result<Vec<PsiParams>> {
    let mut images: Vec<PiRational> = q.points.iter().map(|x| sigma.eval(x).mod1()).collect();
    images.sort();
    let one = PiRational::one();
    let mut out = Vec::with_capacity(q.len());
    for i in 0..q.len() {
        let (lo, hi) = q.lifted(i);
        let len = &hi - &lo;
        let start = lo.mod1();
        let end = &start + &len;
        let mut inside: Vec<&PiRational> = Vec::new();
        let from = images.partition_point(|y| y <= &start);
        if end <= one {
            let to = images.partition_point(|y| y < &end);
            inside.extend(&images[from..to]);
        } else {
            inside.extend(&images[from..]);
            let wrapped = &end - &one;
            let to = images.partition_point(|y| y < &wrapped);
            inside.extend(&images[..to]);
        }
        // Closest normalized distance of an image point to the arc's ends.
        let mut closest = PiRational::ratio(1, 2);
        for y in inside {
            let mut off = y - &start;
            if off.is_negative() {
                off = &off + &one;
            }
            let t = &off / &len;
            let u = &one - &t;
            let near = if t < u { t } else { u };
            if near < closest {
                closest = near;
            }
        }
        let mut j = 0;
        let w = loop {
            let w = &pow2_inv(j) / &PiRational::integer(5);
            if w < closest {
                break w;
            }
            j += 1;
            if j > 200 {
                return Err(Error::InvalidParams(format!("arc {i}: image point too close to an end")));
            }
        };
        let third = BigInt::from(3);
        let eps = w.scale(&BigInt::one(), &BigInt::from(4));
        let a_prime = w.scale(&BigInt::one(), &third);
        let h_prime = &one - &a_prime;
        out.push(PsiParams::new(eps, a_prime, w.clone(), &one - &w, h_prime)?);
    }
    Ok(out)
}

/// Replace `sigma` on every arc of `q` by the rescaled pinch map, then compute the
/// subdivisions, `eta` and `delta` and verify every condition.
pub fn theta_step(sigma: &Lift, q: &Partition, params: &[PsiParams]) -> Result<PerturbedSystem> {
    if params.len() != q.len() {
        return Err(Error::InvalidParams(format!("{} parameter sets for {} arcs", params.len(), q.len())));
    }
    if let Some(k) = sigma.deriv_discontinuities().iter().find(|k| !q.contains_point(k.coord())) {
        return Err(Error::Precondition(format!("zigzag map has a kink at {k} inside an arc")));
    }
    let mut vertices = Vec::with_capacity(11 * q.len());
    let mut subdivisions = Vec::with_capacity(q.len());
    for (i, params) in params.iter().enumerate() {
        let (lo, hi) = q.lifted(i);
        let (a, b) = (sigma.eval(&lo), sigma.eval(&hi));
        let len = &hi - &lo;
        let rise = &b - &a;
        let pts = params.points();
        let shape = crate::families::make_psi(params);
        for (t, v) in shape.breakpoints().iter().zip(shape.values()).take(shape.breakpoints().len() - 1) {
            vertices.push((&lo + &(&len * t), &a + &(&rise * v)));
        }
        subdivisions.push(ArcSubdivision::from_fractions(&lo, &hi, [&pts.c_prime, &pts.d, &pts.e, &pts.f_prime]));
    }
    let theta = Lift::from_cyclic_vertices(&vertices, sigma.degree())?;
    let mut sys = PerturbedSystem {
        theta,
        sigma: sigma.clone(),
        p: q.clone(),
        q: q.clone(),
        subdivisions,
        psi: params.to_vec(),
        eta: PiRational::zero(),
        delta: PiRational::zero(),
        label: String::new(),
        eps: None,
        source_dist: None,
    };
    sys.eta = largest_eta(&sys)?;
    let min_piece = sys.subdivisions.iter().map(ArcSubdivision::min_piece_length).min().unwrap();
    let half_piece = min_piece.half();
    let cap = if sys.eta < half_piece { sys.eta.clone() } else { half_piece };
    sys.delta = &cap * &(PiRational::one() - pow2_inv(10));
    let report = verify_conditions(&sys);
    if let Some(bad) = report.first_failure() {
        return Err(Error::ConditionFailed {
            condition: bad.name,
            arc: bad.arc.unwrap_or(0),
            detail: bad.witness.clone().unwrap_or_default(),
        });
    }
    Ok(sys)
}

/// The smallest margin between the image of the middle three pieces of an arc and the
/// ends of the arc's whole image, over arcs whose image is not the full circle.
fn middle_slack(sys: &PerturbedSystem) -> Option<PiRational> {
    let one = PiRational::one();
    let mut best: Option<PiRational> = None;
    for (j, sub) in sys.subdivisions.iter().enumerate() {
        let (lo, hi) = sys.q.lifted(j);
        let (m, big_m) = sys.theta.image_interval(&lo, &hi);
        if &big_m - &m >= one {
            continue;
        }
        let (im, ibig) = sys.theta.image_interval(&sub.bounds[1], &sub.bounds[4]);
        let a = &im - &m;
        let b = &big_m - &ibig;
        let s = if a < b { a } else { b };
        if best.as_ref().is_none_or(|cur| &s < cur) {
            best = Some(s);
        }
    }
    best
}

/// Largest `2^-k` with `4 * 2^-k` strictly below the middle slack.
fn largest_eta(sys: &PerturbedSystem) -> Result<PiRational> {
    let slack = match middle_slack(sys) {
        None => return Ok(pow2_inv(3)),
        Some(s) if !s.is_positive() => return Err(Error::NoEta),
        Some(s) => s,
    };
    let quarter = slack.scale(&BigInt::one(), &BigInt::from(4));
    let mut k = 0;
    while pow2_inv(k) >= quarter {
        k += 1;
    }
    Ok(pow2_inv(k))
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub arc: Option<usize>,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            write!(f, "{:<12} {verdict}", c.name)?;
            if let Some(w) = &c.witness {
                write!(f, "  {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Tally {
    name: &'static str,
    failure: Option<(usize, String)>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, failure: None }
    }

    fn fail(&mut self, arc: usize, why: impl FnOnce() -> String) {
        if self.failure.is_none() {
            self.failure = Some((arc, why()));
        }
    }

    fn finish(self) -> ConditionCheck {
        match self.failure {
            None => ConditionCheck { name: self.name, passed: true, arc: None, witness: None },
            Some((arc, w)) => ConditionCheck { name: self.name, passed: false, arc: Some(arc), witness: Some(w) },
        }
    }
}

/// Check every covering, nesting and separation condition exactly.
pub fn verify_conditions(sys: &PerturbedSystem) -> ConditionReport {
    let n = sys.q.len();
    let one = PiRational::one();
    let mut c1 = Tally::new("C1");
    let mut c2a = Tally::new("C2a");
    let mut c2b = Tally::new("C2b");
    let mut c3a = Tally::new("C3a");
    let mut c3b = Tally::new("C3b");
    let mut c4 = Tally::new("C4");
    let mut c5 = Tally::new("C5");
    let mut c6 = Tally::new("C6");
    let mut sep = Tally::new("separation");
    let mut shape = Tally::new("subdivision");
    let reach = sys.eta.scale(&BigInt::from(4), &BigInt::one());

    for (j, sub) in sys.subdivisions.iter().enumerate() {
        let (lo, hi) = sys.q.lifted(j);
        if sub.bounds[0] != lo || sub.bounds[5] != hi || sub.bounds.windows(2).any(|w| w[0] >= w[1]) {
            shape.fail(j, || format!("pieces of arc {j} are not an ordered split of it"));
        }
    }
    if sys.subdivisions.len() != n {
        shape.fail(0, || "one subdivision per arc required".into());
    }

    for j in 0..n.min(sys.subdivisions.len()) {
        let sub = &sys.subdivisions[j];
        let (lo, hi) = sys.q.lifted(j);
        let (m, big_m) = sys.theta.image_interval(&lo, &hi);
        let full = &big_m - &m >= one;
        let image = Arc::from_lifted(&m, &big_m);

        let (l_lo, l_hi) = sub.piece_lifted(0);
        let (r_lo, r_hi) = sub.piece_lifted(4);
        let left = sys.theta.image_interval(l_lo, l_hi);
        let right = sys.theta.image_interval(r_lo, r_hi);
        let same = |iv: &(PiRational, PiRational)| {
            if full {
                &iv.1 - &iv.0 >= one
            } else {
                iv.0 == m && iv.1 == big_m
            }
        };
        if !same(&left) || !same(&right) {
            c4.fail(j, || format!("arc {j}: image of an end piece differs from the image of the arc"));
        }

        if !full {
            let (im, ibig) = sys.theta.image_interval(&sub.bounds[1], &sub.bounds[4]);
            if &im - &reach < m || &ibig + &reach > big_m {
                c5.fail(j, || format!("arc {j}: middle image inflated by 4 eta leaves the image"));
            }
        }

        if full {
            continue;
        }
        let meeting = sys.q.arcs_meeting(&image);
        if !meeting.iter().any(|&i| image.contains_arc(&sys.q.arc(i))) {
            c1.fail(j, || format!("image of arc {j} covers no arc"));
        }
        for &i in &meeting {
            let si = &sys.subdivisions[i];
            if image.intersects(&si.left_pair()) {
                if !image.contains_arc(&si.left_pair()) {
                    c2a.fail(j, || format!("image of arc {j} meets but does not contain the left pair of arc {i}"));
                }
                let k = (i + n - 1) % n;
                if !image.contains_arc(&sys.subdivisions[k].right_pair()) {
                    c2b.fail(j, || format!("image of arc {j} enters arc {i} but misses the right pair of arc {k}"));
                }
            }
            if image.intersects(&si.right_pair()) {
                if !image.contains_arc(&si.right_pair()) {
                    c3a.fail(j, || format!("image of arc {j} meets but does not contain the right pair of arc {i}"));
                }
                let k = (i + 1) % n;
                if !image.contains_arc(&sys.subdivisions[k].left_pair()) {
                    c3b.fail(j, || format!("image of arc {j} enters arc {i} but misses the left pair of arc {k}"));
                }
            }
        }
    }

    if !(sys.delta.is_positive() && sys.delta < sys.eta) {
        c6.fail(0, || format!("delta {} must lie in (0, eta)", sys.delta));
    }
    let twice = sys.delta.scale(&BigInt::from(2), &BigInt::one());
    for (j, sub) in sys.subdivisions.iter().enumerate() {
        for k in 0..5 {
            let (a, b) = sub.piece_lifted(k);
            if sub.piece(k).diameter() <= twice {
                c6.fail(j, || format!("arc {j} piece {k} of length {} is not above 2 delta", b - a));
            }
        }
    }

    for (i, x) in sys.q.points().iter().enumerate() {
        let y = sys.theta.eval(x);
        if !y.is_rational() {
            sep.fail(i, || format!("image of partition point {x} is not rational"));
        }
    }

    let mut measure = Tally::new("preservation");
    if !is_preserving(&sys.theta).is_ok_and(|c| c.verdict) {
        measure.fail(0, || "perturbed map does not preserve Lebesgue measure".into());
    }

    ConditionReport {
        checks: vec![
            shape.finish(),
            c1.finish(),
            c2a.finish(),
            c2b.finish(),
            c3a.finish(),
            c3b.finish(),
            c4.finish(),
            c5.finish(),
            c6.finish(),
            sep.finish(),
            measure.finish(),
        ],
    }
}

/// The full construction for a preserving map in normal form, at mesh below `eps`.
pub fn perturb_pipeline(g: &Lift, eps: &PiRational) -> Result<PerturbedSystem> {
    let p = affine_partition(g, eps)?;
    build_on(g, p, eps)
}

fn build_on(g: &Lift, p: Partition, eps: &PiRational) -> Result<PerturbedSystem> {
    let laps = default_laps(g, &p)?;
    let (sigma, q) = sigma_step(g, &p, &laps)?;
    let params = default_psi_params(&sigma, &q)?;
    let mut sys = theta_step(&sigma, &q, &params)?;
    sys.p = p;
    sys.eps = Some(eps.clone());
    sys.source_dist = Some(sup_dist(g, &sys.theta));
    Ok(sys)
}

/// A finer system for `g_fine`, whose partition contains the coarse partition and every
/// coarse pinch vertex. Arcs are also kept short enough, relative to the local slope,
/// that the fine map stays within the coarse `delta` of the coarse map.
pub fn refine_against(coarse: &PerturbedSystem, g_fine: &Lift, eps_fine: &PiRational) -> Result<PerturbedSystem> {
    let gap = sup_dist(g_fine, &coarse.theta);
    if gap >= coarse.delta {
        return Err(Error::Precondition(format!("fine map is {gap} from the coarse map, not below delta {}", coarse.delta)));
    }
    if !eps_fine.is_positive() {
        return Err(Error::InvalidParams("fine eps must be positive".into()));
    }
    // The two-scale tracer needs four fine meshes to fit inside the coarse delta, which
    // also puts the fine mesh below the coarse one.
    let quarter = coarse.delta.scale(&BigInt::from(1023), &BigInt::from(4096));
    let eps_fine = if eps_fine < &quarter { eps_fine } else { &quarter };
    let mut required: Vec<PiRational> = coarse.q.points().to_vec();
    required.extend(coarse.pinch_vertices());
    let cap = (&coarse.delta - &gap).half();
    let p = affine_partition_with(g_fine, eps_fine, &required, Some(&cap))?;
    let fine = build_on(g_fine, p, eps_fine)?;
    let drift = sup_dist(&fine.theta, &coarse.theta);
    if drift >= coarse.delta {
        return Err(Error::Precondition(format!("fine map drifted {drift} from the coarse map")));
    }
    Ok(fine)
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

    /// Degree-two map with kinks at `pi - 3` and `pi - 3 + 3/8`, slopes 8/3 and 8/5.
    fn doubling_conjugate() -> Lift {
        let a = p("pi - 3");
        let b = &a + &r(3, 8);
        Lift::from_cyclic_vertices(&[(a, r(0, 1)), (b, r(1, 1))], 2).unwrap()
    }

    #[test]
    fn partition_locate_and_meeting() {
        let part = Partition::new(vec![p("pi - 3"), p("pi - 3 + 1/4"), p("pi - 3 + 1/2"), p("pi - 3 + 3/4")]).unwrap();
        assert_eq!(part.mesh(), r(1, 4));
        assert_eq!(part.locate(&CirclePoint::new(&r(0, 1))), 3);
        assert_eq!(part.locate(&CirclePoint::new(&p("pi - 3 + 1/4"))), 1);
        let a = Arc::new(&CirclePoint::new(&r(9, 10)), &CirclePoint::new(&r(1, 5)));
        assert_eq!(part.arcs_meeting(&a), vec![3, 0]);
        let b = Arc::new(&CirclePoint::new(&r(1, 10)), &CirclePoint::new(&r(3, 5)));
        assert_eq!(part.arcs_meeting(&b), vec![3, 0, 1]);
        assert!(Partition::new(vec![r(1, 2), p("pi - 3")]).is_err());
    }

    #[test]
    fn affine_partition_without_kinks() {
        // x -> 2x - 2pi has no kinks and sends q + pi to 2q.
        let g = Lift::linear(2, p("-2 pi"));
        let part = affine_partition(&g, &r(1, 2)).unwrap();
        assert!(part.len() >= 3);
        assert!(part.mesh() < r(1, 2));
        assert!(part.points().iter().all(|x| g.eval(x).is_rational()));
    }

    #[test]
    fn affine_partition_keeps_kinks() {
        let g = doubling_conjugate();
        let part = affine_partition(&g, &r(1, 5)).unwrap();
        assert!(part.mesh() < r(1, 5));
        for k in g.deriv_discontinuities() {
            assert!(part.contains_point(k.coord()));
        }
    }

    #[test]
    fn sigma_preserves_and_keeps_degree() {
        let g = doubling_conjugate();
        let part = affine_partition(&g, &r(1, 5)).unwrap();
        let laps = default_laps(&g, &part).unwrap();
        let (sigma, q) = sigma_step(&g, &part, &laps).unwrap();
        assert_eq!(sigma.degree(), 2);
        assert!(is_preserving(&sigma).unwrap().verdict);
        assert!(q.refines(&part));
        assert!(q.points().iter().all(|x| sigma.eval(x).is_rational()));
        let even = vec![2; part.len()];
        assert!(sigma_step(&g, &part, &even).is_err());
    }

    #[test]
    fn sigma_rejects_too_few_laps() {
        // Identity-like pieces barely move, so single laps cannot cover three arcs.
        let g = Lift::linear(1, p("-pi"));
        let part = affine_partition(&g, &r(1, 5)).unwrap();
        let ones = vec![1; part.len()];
        assert!(matches!(sigma_step(&g, &part, &ones), Err(Error::IncreaseLaps { .. })));
    }

    #[test]
    fn pipeline_on_doubling_conjugate() {
        let g = doubling_conjugate();
        let sys = perturb_pipeline(&g, &r(1, 5)).unwrap();
        assert!(sys.mesh() < r(1, 5));
        assert!(verify_conditions(&sys).all_passed());
        assert!(sys.q.refines(&sys.p));
        assert!(sys.delta < sys.eta);
        assert_eq!(sys.theta.degree(), 2);
        for (j, sub) in sys.subdivisions.iter().enumerate() {
            let whole = sys.image_of_arc(j);
            let (a, b) = sub.piece_lifted(0);
            assert_eq!(image_arc(&sys.theta, a, b), whole);
        }
    }

    #[test]
    fn broken_system_is_reported() {
        let g = doubling_conjugate();
        let mut sys = perturb_pipeline(&g, &r(1, 5)).unwrap();
        sys.delta = sys.delta.half();
        assert!(verify_conditions(&sys).all_passed());
        sys.delta = sys.eta.clone();
        assert!(!verify_conditions(&sys).get("C6").unwrap().passed);
    }
}
