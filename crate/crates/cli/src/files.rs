//! TOML formats for maps, systems and orbits. Every number is an exact literal string.

use std::fs;
use std::path::Path;

use pwshadow::circlemap::{CirclePoint, Lift};
use pwshadow::families::PsiParams;
use pwshadow::perturb::{ArcSubdivision, Partition, PerturbedSystem};
use pwshadow::seeds::seed_by_name;
use pwshadow::shadowing::PseudoOrbit;
use pwshadow::PiRational;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn num(s: &str) -> Result<PiRational, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("bad number {s:?}: {e}")))
}

fn nums(v: &[String]) -> Result<Vec<PiRational>, CliError> {
    v.iter().map(|s| num(s)).collect()
}

fn strs(v: &[PiRational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

#[derive(Serialize, Deserialize)]
pub struct MapFile {
    pub degree: i64,
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

impl MapFile {
    pub fn from_lift(l: &Lift) -> Self {
        MapFile { degree: l.degree(), breakpoints: strs(l.breakpoints()), values: strs(l.values()) }
    }

    pub fn to_lift(&self) -> Result<Lift, CliError> {
        Ok(Lift::new(nums(&self.breakpoints)?, nums(&self.values)?, self.degree)?)
    }
}

#[derive(Serialize, Deserialize)]
pub struct PsiFile {
    pub eps: String,
    pub a_prime: String,
    pub d: String,
    pub e: String,
    pub h_prime: String,
}

#[derive(Serialize, Deserialize)]
pub struct SystemFile {
    pub label: String,
    pub eps: Option<String>,
    pub eta: String,
    pub delta: String,
    pub p: Vec<String>,
    pub q: Vec<String>,
    pub sigma: MapFile,
    pub theta: MapFile,
    pub psi: Vec<PsiFile>,
}

impl SystemFile {
    pub fn from_system(s: &PerturbedSystem) -> Self {
        SystemFile {
            label: s.label.clone(),
            eps: s.eps.as_ref().map(ToString::to_string),
            eta: s.eta.to_string(),
            delta: s.delta.to_string(),
            p: strs(s.p.points()),
            q: strs(s.q.points()),
            sigma: MapFile::from_lift(&s.sigma),
            theta: MapFile::from_lift(&s.theta),
            psi: s
                .psi
                .iter()
                .map(|p| {
                    let pts = p.points();
                    PsiFile {
                        eps: p.eps().to_string(),
                        a_prime: pts.a_prime.to_string(),
                        d: pts.d.to_string(),
                        e: pts.e.to_string(),
                        h_prime: pts.h_prime.to_string(),
                    }
                })
                .collect(),
        }
    }

    /// Rebuild the system exactly as stored; nothing is re-derived or re-checked here.
    pub fn to_system(&self) -> Result<PerturbedSystem, CliError> {
        let q = Partition::new(nums(&self.q)?)?;
        let psi = self
            .psi
            .iter()
            .map(|p| PsiParams::new(num(&p.eps)?, num(&p.a_prime)?, num(&p.d)?, num(&p.e)?, num(&p.h_prime)?).map_err(CliError::from))
            .collect::<Result<Vec<_>, _>>()?;
        if psi.len() != q.len() {
            return Err(CliError::Usage(format!("{} pinch parameter sets for {} arcs", psi.len(), q.len())));
        }
        let subdivisions = psi
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (lo, hi) = q.lifted(i);
                let pts = p.points();
                ArcSubdivision::from_fractions(&lo, &hi, [&pts.c_prime, &pts.d, &pts.e, &pts.f_prime])
            })
            .collect();
        Ok(PerturbedSystem {
            theta: self.theta.to_lift()?,
            sigma: self.sigma.to_lift()?,
            p: Partition::new(nums(&self.p)?)?,
            q,
            subdivisions,
            psi,
            eta: num(&self.eta)?,
            delta: num(&self.delta)?,
            label: self.label.clone(),
            eps: self.eps.as_deref().map(num).transpose()?,
            source_dist: None,
        })
    }
}

#[derive(Serialize, Deserialize)]
pub struct OrbitFile {
    pub seed: u64,
    pub noise: String,
    pub delta: String,
    pub points: Vec<String>,
    #[serde(default)]
    pub schedule: Vec<String>,
}

impl OrbitFile {
    pub fn from_orbit(o: &PseudoOrbit, seed: u64, noise: &str) -> Self {
        OrbitFile {
            seed,
            noise: noise.to_string(),
            delta: o.claimed_delta.as_ref().map(ToString::to_string).unwrap_or_default(),
            points: o.points.iter().map(|p| p.coord().to_string()).collect(),
            schedule: o.schedule.as_deref().map(strs).unwrap_or_default(),
        }
    }

    /// Step errors are recomputed under `tau`, never read from the file.
    pub fn to_orbit(&self, tau: &Lift) -> Result<PseudoOrbit, CliError> {
        let points = nums(&self.points)?.iter().map(CirclePoint::new).collect();
        let delta = if self.delta.is_empty() { None } else { Some(num(&self.delta)?) };
        let mut o = PseudoOrbit::from_points(tau, points, delta);
        if !self.schedule.is_empty() {
            o.schedule = Some(nums(&self.schedule)?);
        }
        Ok(o)
    }
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// A map argument: `seed:NAME` for a bundled map, otherwise a map file.
pub fn load_map(arg: &str) -> Result<Lift, CliError> {
    if let Some(name) = arg.strip_prefix("seed:") {
        let seed = seed_by_name(name).ok_or_else(|| CliError::Usage(format!("unknown seed map {name:?}")))?;
        return Ok(seed.build()?);
    }
    read_toml::<MapFile>(Path::new(arg))?.to_lift()
}

pub fn load_system(path: &Path) -> Result<PerturbedSystem, CliError> {
    read_toml::<SystemFile>(path)?.to_system()
}

pub fn to_toml<T: Serialize>(header: &str, value: &T) -> String {
    let body = toml::to_string(value).expect("file structs always serialize");
    format!("{header}{body}")
}
