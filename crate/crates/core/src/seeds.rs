//! Named starting maps for experiments, plus the bundled figure example.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circlemap::{rotate_domain, Lift};
use crate::error::{Error, Result};
use crate::exactnum::PiRational;
use crate::families::{rotate_into_f0, snap_to_f0};
use crate::measure::lebesgueize;

/// A recipe for a preserving map in normal form.
pub trait SeedMap {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn build(&self) -> Result<Lift>;
}

fn r(n: i64, d: i64) -> PiRational {
    PiRational::ratio(n, d)
}

fn pi_minus_3() -> PiRational {
    PiRational::pi() - PiRational::integer(3)
}

/// Two full branches of lengths 3/8 and 5/8, kinked at `pi - 3` and `pi - 3 + 3/8`.
pub struct DoublingConjugate;

impl SeedMap for DoublingConjugate {
    fn name(&self) -> &'static str {
        "doubling"
    }

    fn description(&self) -> &'static str {
        "degree 2, branches of length 3/8 and 5/8"
    }

    fn build(&self) -> Result<Lift> {
        let a = pi_minus_3();
        let b = &a + &r(3, 8);
        Lift::from_cyclic_vertices(&[(a, r(0, 1)), (b, r(1, 1))], 2)
    }
}

/// Three full branches of lengths 1/5, 3/10 and 1/2.
pub struct TriplingShift;

impl SeedMap for TriplingShift {
    fn name(&self) -> &'static str {
        "tripling"
    }

    fn description(&self) -> &'static str {
        "degree 3, branches of length 1/5, 3/10 and 1/2"
    }

    fn build(&self) -> Result<Lift> {
        let a = pi_minus_3();
        let b = &a + &r(1, 5);
        let c = &a + &r(1, 2);
        Lift::from_cyclic_vertices(&[(a, r(0, 1)), (b, r(1, 1)), (c, r(2, 1))], 3)
    }
}

/// The slope-two tent with its kinks moved into `Q + pi`.
pub struct TentRotated;

impl SeedMap for TentRotated {
    fn name(&self) -> &'static str {
        "tent"
    }

    fn description(&self) -> &'static str {
        "degree 0 tent of slope 2, kinks at pi - 3 and pi - 5/2"
    }

    fn build(&self) -> Result<Lift> {
        let tent = Lift::from_vertices(&[(r(0, 1), r(0, 1)), (r(1, 2), r(1, 1)), (r(1, 1), r(0, 1))], 0)?;
        Ok(rotate_domain(&tent, &(PiRational::integer(3) - PiRational::pi())))
    }
}

/// The bundled degree-one figure map, rotated into normal form and made preserving.
pub struct FigureMap;

impl SeedMap for FigureMap {
    fn name(&self) -> &'static str {
        "figure"
    }

    fn description(&self) -> &'static str {
        "the bundled eleven-piece degree-one map, shifted into normal form and made preserving"
    }

    fn build(&self) -> Result<Lift> {
        let shifted = rotate_into_f0(&fig2_left_map(), &r(1, 10)).ok_or(Error::SnapBound { remaining: 1 })?;
        lebesgueize(&shifted)
    }
}

/// A seeded random degree-two lift, snapped into normal form and made preserving.
pub struct SnappedRandom {
    pub seed: u64,
}

impl SeedMap for SnappedRandom {
    fn name(&self) -> &'static str {
        "random"
    }

    fn description(&self) -> &'static str {
        "seeded random degree-2 map with five vertices, snapped and made preserving"
    }

    fn build(&self) -> Result<Lift> {
        let l = random_lift(self.seed, 2, 5, 32);
        let snapped = snap_to_f0(&l, &r(1, 10))?;
        lebesgueize(&snapped)
    }
}

/// A random continuous lift with `vertices` vertices on the grid `1/den`, nonzero slopes
/// and the given degree.
pub fn random_lift(seed: u64, degree: i64, vertices: usize, den: i64) -> Lift {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut xs: Vec<i64> = (0..vertices).map(|_| rng.random_range(1..den)).collect();
        xs.sort();
        xs.dedup();
        let mut pts = vec![(r(0, 1), r(rng.random_range(0..den), den))];
        for x in xs {
            pts.push((r(x, den), r(rng.random_range(-den..2 * den), den)));
        }
        let end = &pts[0].1 + &PiRational::integer(degree);
        pts.push((r(1, 1), end));
        if let Ok(l) = Lift::from_vertices(&pts, degree) {
            if l.has_nonzero_slopes() {
                return l;
            }
        }
    }
}

/// Every named seed, in a fixed order.
pub fn seed_maps() -> Vec<Box<dyn SeedMap>> {
    vec![
        Box::new(DoublingConjugate),
        Box::new(TriplingShift),
        Box::new(TentRotated),
        Box::new(FigureMap),
        Box::new(SnappedRandom { seed: 7 }),
    ]
}

pub fn seed_by_name(name: &str) -> Option<Box<dyn SeedMap>> {
    seed_maps().into_iter().find(|s| s.name() == name)
}

/// Vertex grid of the bundled figure map, in twentieths.
const FIG2_VERTICES: [(i64, i64); 12] =
    [(0, 6), (1, 9), (3, 3), (5, 9), (9, 16), (12, 20), (13, 23), (14, 20), (16, 16), (17, 20), (19, 23), (20, 26)];

/// The left-hand map of the bundled figure: degree one, eleven pieces.
pub fn fig2_left_map() -> Lift {
    let vs: Vec<_> = FIG2_VERTICES.iter().map(|&(x, y)| (r(x, 20), r(y, 20))).collect();
    Lift::from_vertices(&vs, 1).expect("bundled figure map is valid")
}

/// Slopes labelled on the figure's homeomorphism, left to right.
pub const FIG2_H_SLOPES: [(i64, i64); 4] = [(4, 3), (1, 1), (4, 7), (3, 2)];

/// Slopes labelled on the figure's preserving map, left to right.
pub const FIG2_G_SLOPES: [(i64, i64); 11] =
    [(3, 1), (-3, 1), (3, 1), (1, 1), (2, 1), (4, 1), (-4, 1), (-3, 1), (6, 1), (2, 1), (3, 1)];

pub fn fig2_expected_h_slopes() -> Vec<PiRational> {
    FIG2_H_SLOPES.iter().map(|&(n, d)| r(n, d)).collect()
}

pub fn fig2_expected_g_slopes() -> Vec<PiRational> {
    FIG2_G_SLOPES.iter().map(|&(n, d)| r(n, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::check_f0;
    use crate::measure::is_preserving;

    #[test]
    fn every_seed_is_preserving_normal_form() {
        for s in seed_maps() {
            let l = s.build().unwrap();
            assert!(check_f0(&l).verdict, "{}", s.name());
            assert!(is_preserving(&l).unwrap().verdict, "{}", s.name());
        }
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(seed_by_name("tent").unwrap().name(), "tent");
        assert!(seed_by_name("nope").is_none());
    }
}
