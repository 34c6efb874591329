//! Text descriptors for systems, conditions and argument maps.
//!
//! Grammar (reals use Rust float syntax, integers are decimal):
//!
//! ```text
//! system    := "twopoint:" g0 "," g1 "," x            x ∈ {0, 1}
//!            | "cyclic:" m "," x ",g=" v0 (";" v)*    m values, 0 <= x < m
//!            | "circle:alpha=" (real | "golden") ",x=" real ",g=" term (";" term)*
//! term      := real | real "*cos" h | real "*sin" h   h >= 1
//! condition := "all" | "twin" | "kfree:" poly ":" k
//!            | "product:" poly ("*" poly)* ":" k | "mask:" path
//! poly      := c0 ("," c)*                            ascending coefficients
//! argmap    := "id" | "prog:" m "," r
//!            | "beatty:" real "," real | "beatty:" a "/" q "," b "/" q
//! ```
//!
//! Printing a parsed descriptor gives text that parses back to the same
//! value.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use powerfree_core::dynamics::{Observable, Point, System, TrigTerm, GOLDEN};
use powerfree_core::ergodic::{ArgumentMap, Beatty};
use powerfree_core::IntPolynomial;

use crate::{LabError, Result};

fn usage(msg: impl Into<String>) -> LabError {
    LabError::Usage(msg.into())
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| usage(format!("cannot read {what} from {s:?}")))
}

/// A system with its observable and starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub system: System,
    pub observable: Observable,
    pub x: Point,
}

impl SystemSpec {
    pub fn new(system: System, observable: Observable, x: Point) -> Result<Self> {
        system.validate()?;
        observable.check_system(&system)?;
        system.check_point(x)?;
        Ok(SystemSpec { system, observable, x })
    }
}

impl FromStr for SystemSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) =
            s.split_once(':').ok_or_else(|| usage(format!("system descriptor {s:?} lacks a kind prefix")))?;
        match kind {
            "twopoint" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 3 {
                    return Err(usage("twopoint takes g0,g1,x"));
                }
                SystemSpec::new(
                    System::TwoPoint,
                    Observable::TwoPoint(num(parts[0], "g0")?, num(parts[1], "g1")?),
                    Point::Index(num(parts[2], "x")?),
                )
            }
            "cyclic" => {
                let (head, g) = rest.split_once(",g=").ok_or_else(|| usage("cyclic takes m,x,g=v0;v1;…"))?;
                let (m, x) = head.split_once(',').ok_or_else(|| usage("cyclic takes m,x,g=…"))?;
                let values = g.split(';').map(|v| num(v, "observable value")).collect::<Result<Vec<f64>>>()?;
                SystemSpec::new(
                    System::CyclicRotation(num(m, "m")?),
                    Observable::Cyclic(values),
                    Point::Index(num(x, "x")?),
                )
            }
            "circle" => {
                let rest = rest.strip_prefix("alpha=").ok_or_else(|| usage("circle takes alpha=…,x=…,g=…"))?;
                let (alpha, rest) = rest.split_once(",x=").ok_or_else(|| usage("circle needs x=…"))?;
                let (x, g) = rest.split_once(",g=").ok_or_else(|| usage("circle needs g=…"))?;
                let alpha = if alpha == "golden" { GOLDEN } else { num(alpha, "alpha")? };
                let mut constant = 0.0;
                let mut terms = Vec::new();
                for term in g.split(';') {
                    if let Some((a, h)) = term.split_once("*cos") {
                        terms.push(TrigTerm { h: num(h, "frequency")?, a: num(a, "coefficient")?, b: 0.0 });
                    } else if let Some((b, h)) = term.split_once("*sin") {
                        terms.push(TrigTerm { h: num(h, "frequency")?, a: 0.0, b: num(b, "coefficient")? });
                    } else {
                        constant += num::<f64>(term, "constant term")?;
                    }
                }
                SystemSpec::new(
                    System::CircleRotation(alpha),
                    Observable::Circle { constant, terms },
                    Point::Real(num(x, "x")?),
                )
            }
            other => Err(usage(format!("unknown system kind {other:?}"))),
        }
    }
}

fn join(values: &[f64], sep: &str) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.system, &self.observable, self.x) {
            (System::TwoPoint, Observable::TwoPoint(a, b), Point::Index(x)) => write!(f, "twopoint:{a},{b},{x}"),
            (System::CyclicRotation(m), Observable::Cyclic(v), Point::Index(x)) => {
                write!(f, "cyclic:{m},{x},g={}", join(v, ";"))
            }
            (System::CircleRotation(alpha), Observable::Circle { constant, terms }, Point::Real(x)) => {
                if *alpha == GOLDEN {
                    write!(f, "circle:alpha=golden,x={x},g={constant}")?;
                } else {
                    write!(f, "circle:alpha={alpha},x={x},g={constant}")?;
                }
                for t in terms {
                    if t.a != 0.0 || t.b == 0.0 {
                        write!(f, ";{}*cos{}", t.a, t.h)?;
                    }
                    if t.b != 0.0 {
                        write!(f, ";{}*sin{}", t.b, t.h)?;
                    }
                }
                Ok(())
            }
            _ => write!(f, "<inconsistent system>"),
        }
    }
}

/// Parses "c0,c1,…" or a product "c…*c…".
pub fn parse_factors(s: &str) -> Result<Vec<IntPolynomial>> {
    s.split('*').map(|p| p.parse::<IntPolynomial>().map_err(|e| usage(format!("polynomial {p:?}: {e}")))).collect()
}

fn print_factors(fs: &[IntPolynomial]) -> String {
    fs.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("*")
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionSpec {
    All,
    Twin,
    KFree {
        f: IntPolynomial,
        k: u32,
    },
    Product {
        factors: Vec<IntPolynomial>,
        k: u32,
    },
    /// Text file with one selected n per line.
    Mask(PathBuf),
}

impl FromStr for ConditionSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => return Ok(ConditionSpec::All),
            "twin" => return Ok(ConditionSpec::Twin),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("mask:") {
            return Ok(ConditionSpec::Mask(PathBuf::from(path)));
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| usage(format!("unknown condition {s:?}")))?;
        let (poly, k) = rest.rsplit_once(':').ok_or_else(|| usage(format!("condition {s:?} needs :k")))?;
        let k = num(k, "k")?;
        let factors = parse_factors(poly)?;
        match kind {
            "kfree" if factors.len() == 1 => Ok(ConditionSpec::KFree { f: factors.into_iter().next().unwrap(), k }),
            "product" => Ok(ConditionSpec::Product { factors, k }),
            _ => Err(usage(format!("unknown condition {s:?}"))),
        }
    }
}

impl fmt::Display for ConditionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionSpec::All => write!(f, "all"),
            ConditionSpec::Twin => write!(f, "twin"),
            ConditionSpec::KFree { f: p, k } => write!(f, "kfree:{p}:{k}"),
            ConditionSpec::Product { factors, k } => write!(f, "product:{}:{k}", print_factors(factors)),
            ConditionSpec::Mask(p) => write!(f, "mask:{}", p.display()),
        }
    }
}

/// An argument map with its text form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgMapSpec(pub ArgumentMap);

impl FromStr for ArgMapSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let map = if s == "id" {
            ArgumentMap::Identity
        } else if let Some(rest) = s.strip_prefix("prog:") {
            let (m, r) = rest.split_once(',').ok_or_else(|| usage("prog takes m,r"))?;
            ArgumentMap::Progression { m: num(m, "m")?, r: num(r, "r")? }
        } else if let Some(rest) = s.strip_prefix("beatty:") {
            let (a, b) = rest.split_once(',').ok_or_else(|| usage("beatty takes alpha,beta"))?;
            match (a.split_once('/'), b.split_once('/')) {
                (Some((a, q1)), Some((b, q2))) => {
                    let (a, q1, b, q2): (u64, u64, i64, u64) =
                        (num(a, "a")?, num(q1, "q")?, num(b, "b")?, num(q2, "q")?);
                    if q1 != q2 {
                        return Err(usage("beatty fractions must share a denominator"));
                    }
                    ArgumentMap::Beatty(Beatty::Rational { a, b, q: q1 })
                }
                (None, None) => ArgumentMap::Beatty(Beatty::Real { alpha: num(a, "alpha")?, beta: num(b, "beta")? }),
                _ => return Err(usage("beatty takes two reals or two fractions")),
            }
        } else {
            return Err(usage(format!("unknown argument map {s:?}")));
        };
        map.validate()?;
        Ok(ArgMapSpec(map))
    }
}

impl fmt::Display for ArgMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ArgumentMap::Identity => write!(f, "id"),
            ArgumentMap::Progression { m, r } => write!(f, "prog:{m},{r}"),
            ArgumentMap::Beatty(Beatty::Rational { a, b, q }) => write!(f, "beatty:{a}/{q},{b}/{q}"),
            ArgumentMap::Beatty(Beatty::Real { alpha, beta }) => write!(f, "beatty:{alpha},{beta}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round<T: FromStr<Err = LabError> + fmt::Display + PartialEq + fmt::Debug>(s: &str) {
        let v: T = s.parse().unwrap();
        assert_eq!(v.to_string(), s);
        assert_eq!(v.to_string().parse::<T>().unwrap(), v);
    }

    #[test]
    fn canonical_strings_round_trip() {
        round::<SystemSpec>("twopoint:1,-1,0");
        round::<SystemSpec>("cyclic:3,0,g=1;0;0");
        round::<SystemSpec>("circle:alpha=golden,x=0.3,g=1;1*cos1");
        round::<SystemSpec>("circle:alpha=0.1,x=0,g=0;0.5*cos2;-2*sin2");
        round::<ConditionSpec>("all");
        round::<ConditionSpec>("twin");
        round::<ConditionSpec>("kfree:1,0,1:2");
        round::<ConditionSpec>("product:1,0,1*2,0,1:2");
        round::<ConditionSpec>("mask:sel.txt");
        round::<ArgMapSpec>("id");
        round::<ArgMapSpec>("prog:4,3");
        round::<ArgMapSpec>("beatty:3/2,0/2");
        round::<ArgMapSpec>("beatty:1.5,0.25");
    }

    #[test]
    fn rejects_bad_input() {
        assert!("twopoint:1,-1,2".parse::<SystemSpec>().is_err());
        assert!("cyclic:3,0,g=1;0".parse::<SystemSpec>().is_err());
        assert!("circle:alpha=1.5,x=0,g=1".parse::<SystemSpec>().is_err());
        assert!("kfree:1,0,1".parse::<ConditionSpec>().is_err());
        assert!("kfree:1,0,1*1,1:2".parse::<ConditionSpec>().is_err());
        assert!("prog:3,3".parse::<ArgMapSpec>().is_err());
        assert!("beatty:0.5,0.25".parse::<ArgMapSpec>().is_err());
        assert!("beatty:3/2,1/3".parse::<ArgMapSpec>().is_err());
    }

    proptest! {
        #[test]
        fn systems_round_trip(g0 in -1e6f64..1e6, g1 in -1e6f64..1e6, x in 0u64..2,
                              vals in proptest::collection::vec(-100.0f64..100.0, 1..6),
                              alpha in 0.001f64..0.999, cx in 0.0f64..1.0, c in -5.0f64..5.0,
                              a in -5.0f64..5.0, h in 1u32..9) {
            for spec in [
                SystemSpec::new(System::TwoPoint, Observable::TwoPoint(g0, g1), Point::Index(x)).unwrap(),
                SystemSpec::new(System::CyclicRotation(vals.len() as u64), Observable::Cyclic(vals.clone()), Point::Index(0)).unwrap(),
                SystemSpec::new(
                    System::CircleRotation(alpha),
                    Observable::Circle { constant: c, terms: vec![TrigTerm { h, a, b: 0.0 }, TrigTerm { h: h + 1, a: 0.0, b: a + 10.0 }] },
                    Point::Real(cx),
                ).unwrap(),
            ] {
                let back: SystemSpec = spec.to_string().parse().unwrap();
                prop_assert_eq!(back, spec);
            }
        }

        #[test]
        fn conditions_round_trip(c in proptest::collection::vec(-50i64..50, 1..4), lead in 1i64..9, k in 2u32..5) {
            let mut c = c;
            c.push(lead);
            let f = IntPolynomial::from_i64(&c).unwrap();
            for spec in [
                ConditionSpec::KFree { f: f.clone(), k },
                ConditionSpec::Product { factors: vec![f.clone(), f.clone()], k },
            ] {
                let back: ConditionSpec = spec.to_string().parse().unwrap();
                prop_assert_eq!(back, spec);
            }
        }

        #[test]
        fn argmaps_round_trip(m in 1u64..50, r in 0u64..50, alpha in 0.01f64..10.0, beta in 1.0f64..5.0) {
            let maps = [
                ArgumentMap::Progression { m, r: r % m },
                ArgumentMap::Beatty(Beatty::Real { alpha, beta }),
                ArgumentMap::Beatty(Beatty::Rational { a: m, b: r as i64, q: 1 }),
            ];
            for map in maps {
                if map.validate().is_err() {
                    continue;
                }
                let spec = ArgMapSpec(map);
                let back: ArgMapSpec = spec.to_string().parse().unwrap();
                prop_assert_eq!(back, spec);
            }
        }
    }
}
