//! Collinear libration points: Euler quintics, expansion coefficients of the
//! gravitational potential, and the change between synodic pulsating
//! coordinates and the local frame centred on a collinear point.
//!
//! Orientation follows the rotating-pulsating frame used throughout the
//! crate: the larger primary sits at `(mu, 0, 0)`, the smaller one at
//! `(mu - 1, 0, 0)`. L1 lies between them, L2 to the left of the smaller
//! primary and L3 to the right of the larger one.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::fmath::powi;
use crate::roots::{bisect, newton_polish};

/// Mass ratio and eccentricity of the primaries' orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemParams {
    pub mu: f64,
    pub e: f64,
}

impl SystemParams {
    pub const EARTH_MOON_MU: f64 = 0.012150586;
    pub const EARTH_MOON_E: f64 = 0.0549;

    pub fn new(mu: f64, e: f64) -> Result<Self> {
        check_mu(mu)?;
        if !(0.0..1.0).contains(&e) || !e.is_finite() {
            return Err(Error::InvalidEccentricity(e));
        }
        Ok(Self { mu, e })
    }

    pub fn earth_moon() -> Self {
        Self { mu: Self::EARTH_MOON_MU, e: Self::EARTH_MOON_E }
    }

    /// Same mass ratio, different eccentricity.
    pub fn with_eccentricity(self, e: f64) -> Result<Self> {
        Self::new(self.mu, e)
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidMassRatio(mu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Point {
    L1,
    L2,
    L3,
}

impl Point {
    pub const ALL: [Point; 3] = [Point::L1, Point::L2, Point::L3];

    /// +1 for L1/L2, -1 for L3: the upper/lower signs of the local-frame map.
    pub fn sign(self) -> f64 {
        match self {
            Point::L1 | Point::L2 => 1.0,
            Point::L3 => -1.0,
        }
    }

    fn bracket(self) -> (f64, f64) {
        match self {
            Point::L1 | Point::L2 => (0.0, 1.0),
            Point::L3 => (0.0, 2.5),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Point::L1 => "L1",
            Point::L2 => "L2",
            Point::L3 => "L3",
        };
        f.write_str(name)
    }
}

impl core::str::FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L1" | "l1" | "1" => Ok(Point::L1),
            "L2" | "l2" | "2" => Ok(Point::L2),
            "L3" | "l3" | "3" => Ok(Point::L3),
            _ => Err(Error::OutOfDomain("collinear point must be L1, L2 or L3")),
        }
    }
}

/// Coefficients of the Euler quintic for `point`, highest power first.
pub fn quintic_coefficients(point: Point, mu: f64) -> [f64; 6] {
    match point {
        Point::L1 => [1.0, -(3.0 - mu), 3.0 - 2.0 * mu, -mu, 2.0 * mu, -mu],
        Point::L2 => [1.0, 3.0 - mu, 3.0 - 2.0 * mu, -mu, -2.0 * mu, -mu],
        Point::L3 => [
            1.0,
            2.0 + mu,
            1.0 + 2.0 * mu,
            -(1.0 - mu),
            -2.0 * (1.0 - mu),
            -(1.0 - mu),
        ],
    }
}

/// Value and derivative of the quintic at `gamma` (Horner).
pub fn quintic(point: Point, mu: f64, gamma: f64) -> (f64, f64) {
    let coeffs = quintic_coefficients(point, mu);
    let mut p = 0.0;
    let mut dp = 0.0;
    for c in coeffs {
        dp = dp * gamma + p;
        p = p * gamma + c;
    }
    (p, dp)
}

const BISECTION_WIDTH: f64 = 1e-10;

/// Distance from `point` to its closest primary, in pulsating units.
pub fn solve_gamma(point: Point, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let (lo, hi) = point.bracket();
    let (a, b) = bisect(|g| quintic(point, mu, g).0, lo, hi, BISECTION_WIDTH, "Euler quintic")?;
    if a == b {
        return Ok(a);
    }
    newton_polish(|g| quintic(point, mu, g), 0.5 * (a + b), a, b, 1e-15, 50, "Euler quintic")
}

/// Expansion coefficient `c_n(mu)` for a known `gamma`.
pub fn c_n_with_gamma(point: Point, mu: f64, gamma: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::OrderTooLow(n));
    }
    let n1 = n as i32 + 1;
    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
    let g3 = gamma * gamma * gamma;
    Ok(match point {
        Point::L1 => (mu + parity * (1.0 - mu) * powi(gamma / (1.0 - gamma), n1)) / g3,
        Point::L2 => parity * (mu + (1.0 - mu) * powi(gamma / (1.0 + gamma), n1)) / g3,
        Point::L3 => parity * (1.0 - mu + mu * powi(gamma / (1.0 + gamma), n1)) / g3,
    })
}

/// `c_n(mu)` for `point`, solving the quintic first.
pub fn c_n(point: Point, mu: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::OrderTooLow(n));
    }
    let gamma = solve_gamma(point, mu)?;
    c_n_with_gamma(point, mu, gamma, n)
}

/// `T_n(x, y, z) = rho^n P_n(x / rho)` through the three-term recursion.
pub fn legendre_t(n: usize, x: f64, y: f64, z: f64) -> f64 {
    let rho2 = x * x + y * y + z * z;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * kf - 1.0) / kf * x * cur - (kf - 1.0) / kf * rho2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub const DEFAULT_MAX_ORDER: usize = 8;

/// A collinear point together with its local-frame constants and the
/// expansion coefficients `c_2 ..= c_max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollinearFrame {
    pub point: Point,
    pub mu: f64,
    pub gamma: f64,
    /// Synodic offset `a_j`; the point itself sits at `X = mu + a_j`.
    pub a_offset: f64,
    pub sign: f64,
    coefficients: Vec<f64>,
}

impl CollinearFrame {
    pub fn new(point: Point, mu: f64) -> Result<Self> {
        Self::with_max_order(point, mu, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(point: Point, mu: f64, max_order: usize) -> Result<Self> {
        let gamma = solve_gamma(point, mu)?;
        let a_offset = match point {
            Point::L1 => -1.0 + gamma,
            Point::L2 => -1.0 - gamma,
            Point::L3 => gamma,
        };
        let coefficients = (2..=max_order.max(2))
            .map(|n| c_n_with_gamma(point, mu, gamma, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { point, mu, gamma, a_offset, sign: point.sign(), coefficients })
    }

    pub fn max_order(&self) -> usize {
        self.coefficients.len() + 1
    }

    pub fn c_n(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::OrderTooLow(n));
        }
        match self.coefficients.get(n - 2) {
            Some(&c) => Ok(c),
            None => c_n_with_gamma(self.point, self.mu, self.gamma, n),
        }
    }

    /// Synodic X of the libration point.
    pub fn synodic_x(&self) -> f64 {
        self.mu + self.a_offset
    }

    pub fn quintic_residual(&self) -> f64 {
        quintic(self.point, self.mu, self.gamma).0
    }

    pub fn local_from_synodic(&self, synodic: [f64; 3]) -> [f64; 3] {
        let scale = -self.sign * self.gamma;
        [
            (synodic[0] - self.mu - self.a_offset) / scale,
            synodic[1] / scale,
            synodic[2] / self.gamma,
        ]
    }

    pub fn synodic_from_local(&self, local: [f64; 3]) -> [f64; 3] {
        let scale = -self.sign * self.gamma;
        [scale * local[0] + self.mu + self.a_offset, scale * local[1], self.gamma * local[2]]
    }

    /// Velocities transform with the linear part of the position map only.
    pub fn local_velocity_from_synodic(&self, velocity: [f64; 3]) -> [f64; 3] {
        let scale = -self.sign * self.gamma;
        [velocity[0] / scale, velocity[1] / scale, velocity[2] / self.gamma]
    }

    pub fn synodic_velocity_from_local(&self, velocity: [f64; 3]) -> [f64; 3] {
        let scale = -self.sign * self.gamma;
        [scale * velocity[0], scale * velocity[1], self.gamma * velocity[2]]
    }

    /// Constant term of the affine energy map (its value at zero local energy).
    pub fn energy_intercept(&self) -> f64 {
        let (mu, g) = (self.mu, self.gamma);
        match self.point {
            Point::L1 => -0.5 * (1.0 - g - mu) * (1.0 - g - mu) - mu / g - (1.0 - mu) / (1.0 - g),
            Point::L2 => -0.5 * (1.0 + g - mu) * (1.0 + g - mu) - mu / g - (1.0 - mu) / (1.0 + g),
            Point::L3 => -0.5 * (g + mu) * (g + mu) - (1.0 - mu) / g - mu / (1.0 + g),
        }
    }

    pub fn energy_synodic_from_local(&self, local_energy: f64) -> f64 {
        local_energy * self.gamma * self.gamma + self.energy_intercept()
    }

    pub fn energy_local_from_synodic(&self, synodic_energy: f64) -> f64 {
        (synodic_energy - self.energy_intercept()) / (self.gamma * self.gamma)
    }
}
