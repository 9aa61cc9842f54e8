//! Trigonometric series in the actions, the eccentricity and the angles
//! `(θ_y, θ_z, f)`, stored as plain-text tables.
//!
//! Each non-comment line of a table holds eight fields:
//!
//! ```text
//! coefficient  p  q  r  k_y  k_z  k_f  kind
//! ```
//!
//! for the term `coefficient · J_y^p · J_z^q · e^r · g(k_y θ_y + k_z θ_z + k_f f)`.
//! The action powers are multiples of one half (`0`, `1/2`, `1`, `3/2`, ...);
//! `kind` is `sin`, `cos` or `cossin` (`cos φ · sin φ`).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::{powi, sin_cos, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Harmonic {
    Sin,
    Cos,
    CosSin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesTerm {
    pub coefficient: f64,
    /// Power of `J_y`, in halves.
    pub jy_halves: u32,
    /// Power of `J_z`, in halves.
    pub jz_halves: u32,
    pub e_power: u32,
    pub ky: i32,
    pub kz: i32,
    pub kf: i32,
    pub kind: Harmonic,
}

impl SeriesTerm {
    /// Degree counting each action as 2 and the eccentricity as 1.
    pub fn degree(&self) -> u32 {
        self.jy_halves + self.jz_halves + self.e_power
    }
}

/// Value of a series and its partial derivatives in the three angles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeriesValue {
    pub value: f64,
    pub d_theta_y: f64,
    pub d_theta_z: f64,
    pub d_f: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesTable {
    pub terms: Vec<SeriesTerm>,
}

fn parse_halves(field: &str, line: usize) -> Result<u32> {
    let err = Error::SeriesParse { line, message: "action power must be k or k/2" };
    match field.split_once('/') {
        Some((num, "2")) => num.parse::<u32>().map_err(|_| err),
        Some(_) => Err(err),
        None => field.parse::<u32>().map(|k| 2 * k).map_err(|_| err),
    }
}

impl SeriesTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 8 {
                return Err(Error::SeriesParse { line, message: "expected eight fields" });
            }
            let coefficient: f64 =
                fields[0].parse().map_err(|_| Error::SeriesParse { line, message: "bad coefficient" })?;
            let int = |s: &str| s.parse::<i32>().map_err(|_| Error::SeriesParse { line, message: "bad harmonic" });
            let e_power =
                fields[3].parse::<u32>().map_err(|_| Error::SeriesParse { line, message: "bad eccentricity power" })?;
            let kind = match fields[7] {
                "sin" => Harmonic::Sin,
                "cos" => Harmonic::Cos,
                "cossin" => Harmonic::CosSin,
                _ => return Err(Error::SeriesParse { line, message: "kind must be sin, cos or cossin" }),
            };
            terms.push(SeriesTerm {
                coefficient,
                jy_halves: parse_halves(fields[1], line)?,
                jz_halves: parse_halves(fields[2], line)?,
                e_power,
                ky: int(fields[4])?,
                kz: int(fields[5])?,
                kf: int(fields[6])?,
                kind,
            });
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, jy: f64, jz: f64, theta_y: f64, theta_z: f64, f: f64, e: f64) -> f64 {
        self.eval_with_partials(jy, jz, theta_y, theta_z, f, e).value
    }

    pub fn eval_with_partials(&self, jy: f64, jz: f64, theta_y: f64, theta_z: f64, f: f64, e: f64) -> SeriesValue {
        let (sy, sz) = (sqrt(jy.max(0.0)), sqrt(jz.max(0.0)));
        let mut out = SeriesValue::default();
        for t in &self.terms {
            let amp = t.coefficient * powi(sy, t.jy_halves as i32) * powi(sz, t.jz_halves as i32) * powi(e, t.e_power as i32);
            if amp == 0.0 {
                continue;
            }
            let phase = t.ky as f64 * theta_y + t.kz as f64 * theta_z + t.kf as f64 * f;
            let (s, c) = sin_cos(phase);
            let (g, dg) = match t.kind {
                Harmonic::Sin => (s, c),
                Harmonic::Cos => (c, -s),
                Harmonic::CosSin => (c * s, c * c - s * s),
            };
            out.value += amp * g;
            out.d_theta_y += amp * dg * t.ky as f64;
            out.d_theta_z += amp * dg * t.kz as f64;
            out.d_f += amp * dg * t.kf as f64;
        }
        out
    }
}

/// The three coordinate series of an orbit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitSeriesTable {
    pub x: SeriesTable,
    pub y: SeriesTable,
    pub z: SeriesTable,
}

impl OrbitSeriesTable {
    /// Earth–Moon L1 tables, in synodic pulsating coordinates.
    pub fn earth_moon_l1() -> Result<Self> {
        Ok(Self {
            x: SeriesTable::parse(include_str!("../data/earth_moon_l1/x.series"))?,
            y: SeriesTable::parse(include_str!("../data/earth_moon_l1/y.series"))?,
            z: SeriesTable::parse(include_str!("../data/earth_moon_l1/z.series"))?,
        })
    }

    pub fn eval(&self, jy: f64, jz: f64, theta_y: f64, theta_z: f64, f: f64, e: f64) -> [f64; 3] {
        [
            self.x.eval(jy, jz, theta_y, theta_z, f, e),
            self.y.eval(jy, jz, theta_y, theta_z, f, e),
            self.z.eval(jy, jz, theta_y, theta_z, f, e),
        ]
    }

    pub fn eval_with_partials(&self, jy: f64, jz: f64, theta_y: f64, theta_z: f64, f: f64, e: f64) -> [SeriesValue; 3] {
        [
            self.x.eval_with_partials(jy, jz, theta_y, theta_z, f, e),
            self.y.eval_with_partials(jy, jz, theta_y, theta_z, f, e),
            self.z.eval_with_partials(jy, jz, theta_y, theta_z, f, e),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GeneratingFunction {
    Chi1,
    Chi2,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratingFunctionTable {
    pub chi1: SeriesTable,
    pub chi2: SeriesTable,
}

impl GeneratingFunctionTable {
    pub fn earth_moon_l1() -> Result<Self> {
        Ok(Self {
            chi1: SeriesTable::parse(include_str!("../data/earth_moon_l1/chi1.series"))?,
            chi2: SeriesTable::parse(include_str!("../data/earth_moon_l1/chi2.series"))?,
        })
    }

    pub fn table(&self, which: GeneratingFunction) -> &SeriesTable {
        match which {
            GeneratingFunction::Chi1 => &self.chi1,
            GeneratingFunction::Chi2 => &self.chi2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_half_powers_and_kinds() {
        let t = SeriesTable::parse("# c\n0.5 3/2 1 2 1 -2 1 cossin # trailing\n\n-1 0 0 0 0 0 0 cos\n").unwrap();
        assert_eq!(t.terms.len(), 2);
        let a = t.terms[0];
        assert_eq!((a.jy_halves, a.jz_halves, a.e_power, a.ky, a.kz, a.kf), (3, 2, 2, 1, -2, 1));
        assert_eq!(a.kind, Harmonic::CosSin);
        assert_eq!(t.terms[1].coefficient, -1.0);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert_eq!(
            SeriesTable::parse("1 0 0 0 0 0 cos"),
            Err(Error::SeriesParse { line: 1, message: "expected eight fields" })
        );
        assert!(SeriesTable::parse("1 1/3 0 0 0 0 0 cos").is_err());
        assert!(SeriesTable::parse("1 0 0 0 0 0 0 tan").is_err());
        assert!(SeriesTable::parse("x 0 0 0 0 0 0 sin").is_err());
    }

    #[test]
    fn embedded_tables_have_expected_sizes() {
        let o = OrbitSeriesTable::earth_moon_l1().unwrap();
        assert_eq!((o.x.terms.len(), o.y.terms.len(), o.z.terms.len()), (22, 19, 17));
        let g = GeneratingFunctionTable::earth_moon_l1().unwrap();
        assert_eq!((g.chi1.terms.len(), g.chi2.terms.len()), (11, 25));
    }

    #[test]
    fn generating_function_degrees() {
        let g = GeneratingFunctionTable::earth_moon_l1().unwrap();
        assert!(g.chi1.terms.iter().all(|t| t.degree() == 3));
        assert!(g.chi2.terms.iter().all(|t| t.degree() == 4));
    }

    #[test]
    fn partials_match_differences() {
        let o = OrbitSeriesTable::earth_moon_l1().unwrap();
        let (jy, jz, ty, tz, f, e) = (0.8, 0.3, 0.4, 1.3, 0.9, 0.2);
        let h = 1e-6;
        for table in [&o.x, &o.y, &o.z] {
            let v = table.eval_with_partials(jy, jz, ty, tz, f, e);
            let dy = (table.eval(jy, jz, ty + h, tz, f, e) - table.eval(jy, jz, ty - h, tz, f, e)) / (2.0 * h);
            let dz = (table.eval(jy, jz, ty, tz + h, f, e) - table.eval(jy, jz, ty, tz - h, f, e)) / (2.0 * h);
            let df = (table.eval(jy, jz, ty, tz, f + h, e) - table.eval(jy, jz, ty, tz, f - h, e)) / (2.0 * h);
            assert!((v.d_theta_y - dy).abs() < 1e-9);
            assert!((v.d_theta_z - dz).abs() < 1e-9);
            assert!((v.d_f - df).abs() < 1e-9);
        }
    }
}
