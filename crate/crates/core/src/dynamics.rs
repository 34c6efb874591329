//! Uniquely ergodic model systems and orbit tables g(T^j x).
//!
//! Irrationality of a circle rotation angle is assumed, not checked.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::{Error, Result};

/// Largest orbit depth a table may hold.
pub const MAX_J: usize = 128;

/// The golden rotation angle (√5 − 1)/2.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    /// Swap of two points.
    TwoPoint,
    /// x ↦ x + 1 mod m.
    CyclicRotation(u64),
    /// x ↦ x + α mod 1, α ∈ (0, 1).
    CircleRotation(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// Point of a finite system.
    Index(u64),
    /// Point of the circle, in [0, 1).
    Real(f64),
}

impl System {
    pub fn validate(&self) -> Result<()> {
        match *self {
            System::TwoPoint => Ok(()),
            System::CyclicRotation(m) if m >= 1 => Ok(()),
            System::CyclicRotation(_) => Err(Error::Invalid("cyclic rotation needs m >= 1".into())),
            System::CircleRotation(a) if a > 0.0 && a < 1.0 => Ok(()),
            System::CircleRotation(a) => Err(Error::Invalid(format!("rotation angle must lie in (0, 1), got {a}"))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            System::TwoPoint => "rotation on two points".into(),
            System::CyclicRotation(m) => format!("rotation by 1 on Z/{m}Z"),
            System::CircleRotation(a) => format!("circle rotation by {a}"),
        }
    }

    pub fn check_point(&self, x: Point) -> Result<()> {
        match (*self, x) {
            (System::TwoPoint, Point::Index(i)) if i < 2 => Ok(()),
            (System::CyclicRotation(m), Point::Index(i)) if i < m => Ok(()),
            (System::CircleRotation(_), Point::Real(t)) if (0.0..1.0).contains(&t) => Ok(()),
            _ => Err(Error::Invalid(format!("point {x:?} is not in {}", self.describe()))),
        }
    }

    /// One application of T.
    pub fn step(&self, x: Point) -> Point {
        match (*self, x) {
            (System::TwoPoint, Point::Index(i)) => Point::Index(1 - i),
            (System::CyclicRotation(m), Point::Index(i)) => Point::Index((i + 1) % m),
            (System::CircleRotation(a), Point::Real(t)) => {
                let s = t + a;
                Point::Real(if s >= 1.0 { s - 1.0 } else { s })
            }
            _ => x,
        }
    }

    /// T^j x in closed form.
    pub fn power(&self, x: Point, j: u64) -> Point {
        match (*self, x) {
            (System::TwoPoint, Point::Index(i)) => Point::Index((i + j) % 2),
            (System::CyclicRotation(m), Point::Index(i)) => Point::Index(((i as u128 + j as u128) % m as u128) as u64),
            (System::CircleRotation(a), Point::Real(t)) => {
                let s = t + j as f64 * a;
                let f = s - libm::floor(s);
                Point::Real(if f >= 1.0 { 0.0 } else { f })
            }
            _ => x,
        }
    }
}

/// One term a·cos 2πhx + b·sin 2πhx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub h: u32,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Values at points 0 and 1.
    TwoPoint(f64, f64),
    /// Values at residues 0..m.
    Cyclic(Vec<f64>),
    /// constant + Σ terms; frequencies h ≥ 1.
    Circle { constant: f64, terms: Vec<TrigTerm> },
}

impl Observable {
    /// ∫ g dμ.
    pub fn mean(&self) -> f64 {
        match self {
            Observable::TwoPoint(a, b) => (a + b) / 2.0,
            Observable::Cyclic(v) => v.iter().sum::<f64>() / v.len() as f64,
            Observable::Circle { constant, .. } => *constant,
        }
    }

    /// Indicator of one residue class mod m.
    pub fn indicator(m: u64, r: u64) -> Result<Self> {
        if r >= m {
            return Err(Error::Invalid(format!("residue {r} not below {m}")));
        }
        Ok(Observable::Cyclic((0..m).map(|i| if i == r { 1.0 } else { 0.0 }).collect()))
    }

    pub fn check_system(&self, sys: &System) -> Result<()> {
        match (self, sys) {
            (Observable::TwoPoint(..), System::TwoPoint) => Ok(()),
            (Observable::Cyclic(v), System::CyclicRotation(m)) if v.len() as u64 == *m => Ok(()),
            (Observable::Circle { terms, .. }, System::CircleRotation(_)) if terms.iter().all(|t| t.h >= 1) => Ok(()),
            _ => Err(Error::Invalid(format!("observable does not fit {}", sys.describe()))),
        }
    }

    /// g(x); the point must belong to the matching system.
    pub fn eval(&self, x: Point) -> f64 {
        match (self, x) {
            (Observable::TwoPoint(a, b), Point::Index(i)) => {
                if i == 0 {
                    *a
                } else {
                    *b
                }
            }
            (Observable::Cyclic(v), Point::Index(i)) => v[i as usize],
            (Observable::Circle { constant, terms }, Point::Real(t)) => terms.iter().fold(*constant, |acc, term| {
                let phase = TAU * term.h as f64 * t;
                acc + term.a * libm::cos(phase) + term.b * libm::sin(phase)
            }),
            _ => f64::NAN,
        }
    }
}

/// g(T^j x) for j = 0..=J.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTable {
    pub values: Vec<f64>,
    pub mean: f64,
    pub x: Point,
    pub j_max: usize,
}

impl OrbitTable {
    pub fn value(&self, j: usize) -> Option<f64> {
        self.values.get(j).copied()
    }
}

fn check(sys: &System, obs: &Observable, x: Point, j_max: usize) -> Result<()> {
    sys.validate()?;
    obs.check_system(sys)?;
    sys.check_point(x)?;
    if j_max > MAX_J {
        return Err(Error::OutOfRange { what: "J_max", value: j_max as u64, lo: 0, hi: MAX_J as u64 + 1 });
    }
    Ok(())
}

/// Orbit table from the closed form of T^j.
pub fn orbit_table(sys: &System, obs: &Observable, x: Point, j_max: usize) -> Result<OrbitTable> {
    check(sys, obs, x, j_max)?;
    let values = (0..=j_max as u64).map(|j| obs.eval(sys.power(x, j))).collect();
    Ok(OrbitTable { values, mean: obs.mean(), x, j_max })
}

/// Orbit table by repeated application of T.
pub fn iterated_orbit_table(sys: &System, obs: &Observable, x: Point, j_max: usize) -> Result<OrbitTable> {
    check(sys, obs, x, j_max)?;
    let mut values = Vec::with_capacity(j_max + 1);
    let mut y = x;
    for _ in 0..=j_max {
        values.push(obs.eval(y));
        y = sys.step(y);
    }
    Ok(OrbitTable { values, mean: obs.mean(), x, j_max })
}

/// 1 + ⌊log₂ a⌋, enough to cover Ω(n) for n ≤ a.
pub fn default_j_max(max_arg: u64) -> usize {
    (1 + max_arg.max(1).ilog2() as usize).min(MAX_J)
}
