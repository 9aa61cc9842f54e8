//! Resonant normal form on the center manifold.
//!
//! With actions `(J_y, J_z)` and angles `(θ_y, θ_z)` the normal form reads
//!
//! ```text
//! K = Ω_y J_y + Ω_z J_z + K2 + K4
//! K2 = α J_y² + β J_z² + J_y J_z (σ + 2τ cos 2ψ)
//! K4 = α1 J_y³ + β1 J_z³ + σ1 J_y² J_z + σ2 J_y J_z²
//!      + 2(τ1 J_y² J_z + τ2 J_y J_z²) cos 2ψ
//! ```
//!
//! where `ψ = θ_y - θ_z`. The frequencies `Ω_y`, `Ω_z` are even power series
//! in the eccentricity and `α, β, σ, τ` carry an `e²` correction.

use crate::error::{Error, Result};
use crate::fmath::{cos, sin, sin_cos};
use crate::geometry::{Point, SystemParams};
use crate::linear::{linearize, LinearData};
use crate::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    Y,
    Z,
}

/// How much of the normal form enters the nonlinear frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum KappaOrder {
    /// `Ω` through `e²`, constant parts of the quadratic coefficients, no
    /// cubic terms.
    Leading,
    /// Full frequency series, `e²`-corrected quadratic coefficients and the
    /// cubic terms.
    #[default]
    Full,
}

/// A coefficient of the form `constant + e2 · e²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EccentricCoefficient {
    pub constant: f64,
    pub e2: f64,
}

impl EccentricCoefficient {
    pub const fn new(constant: f64, e2: f64) -> Self {
        Self { constant, e2 }
    }

    pub fn at(&self, e: f64) -> f64 {
        self.constant + self.e2 * e * e
    }
}

pub const SERIES_LEN: usize = 9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CMModel {
    pub point: Point,
    pub params: SystemParams,
    /// Coefficients of `e^n`, `n = 0..=8`; odd entries vanish.
    pub omega_y_series: [f64; SERIES_LEN],
    pub omega_z_series: [f64; SERIES_LEN],
    pub alpha: EccentricCoefficient,
    pub beta: EccentricCoefficient,
    pub sigma: EccentricCoefficient,
    pub tau: EccentricCoefficient,
    pub alpha1: f64,
    pub beta1: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Linear frequencies at the point (exact, not the rounded series heads).
    pub linear_omega_y: f64,
    pub linear_omega_z: f64,
    /// Linear detuning `linear_omega_y - linear_omega_z`.
    pub delta: f64,
}

/// `a, b, c, d` of the reduced Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReducedCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum HaloBranch {
    /// `ψ = +π/2`.
    #[default]
    North,
    /// `ψ = -π/2`.
    South,
}

impl HaloBranch {
    pub fn psi(self) -> f64 {
        match self {
            HaloBranch::North => core::f64::consts::FRAC_PI_2,
            HaloBranch::South => -core::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HaloSolution {
    pub ecal: f64,
    pub r_eq: f64,
    pub jy_halo: f64,
    pub jz_halo: f64,
    pub omega_h: f64,
    pub branch: HaloBranch,
}

/// First-order halo bifurcation energy, split as `constant + e2 · e²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BifurcationEnergy {
    pub constant: f64,
    pub e2_coefficient: f64,
    pub e: f64,
    /// `constant + e2_coefficient · e²`, in local energy units.
    pub value: f64,
}

/// Right-hand side of the normal-form flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmFlow {
    pub jy_dot: f64,
    pub jz_dot: f64,
    pub theta_y_dot: f64,
    pub theta_z_dot: f64,
}

fn horner(series: &[f64; SERIES_LEN], e: f64) -> f64 {
    series.iter().rev().fold(0.0, |acc, &c| acc * e + c)
}

impl CMModel {
    /// Earth–Moon L1 normal form at eccentricity `e`.
    pub fn earth_moon_l1(e: f64) -> Result<Self> {
        let params = SystemParams::new(SystemParams::EARTH_MOON_MU, e)?;
        let linear = linearize(Point::L1, params.mu)?;
        Ok(Self::earth_moon_l1_with(params, &linear))
    }

    fn earth_moon_l1_with(params: SystemParams, linear: &LinearData) -> Self {
        Self {
            point: Point::L1,
            params,
            omega_y_series: [2.33439, 0.0, 0.356732, 0.0, 0.200957, 0.0, 0.139319, 0.0, 0.106541],
            omega_z_series: [2.26883, 0.0, 0.360261, 0.0, 0.201856, 0.0, 0.139720, 0.0, 0.106766],
            alpha: EccentricCoefficient::new(-0.162101380, -0.005834207),
            beta: EccentricCoefficient::new(-0.144882524, -0.006620655),
            sigma: EccentricCoefficient::new(-0.072614915, -0.009081915),
            tau: EccentricCoefficient::new(-0.23307061, -0.002303888),
            alpha1: -0.01326986,
            beta1: -0.008427193,
            sigma1: -0.00294965,
            sigma2: -0.0023065,
            tau1: -0.03174666,
            tau2: -0.02757057,
            linear_omega_y: linear.omega_y,
            linear_omega_z: linear.omega_z,
            delta: linear.delta,
        }
    }

    /// Same coefficients at another eccentricity.
    pub fn with_eccentricity(&self, e: f64) -> Result<Self> {
        let mut out = self.clone();
        out.params = self.params.with_eccentricity(e)?;
        Ok(out)
    }

    pub fn e(&self) -> f64 {
        self.params.e
    }

    pub fn omega_eval(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Y => horner(&self.omega_y_series, self.e()),
            Mode::Z => horner(&self.omega_z_series, self.e()),
        }
    }

    /// Frequency truncated after the `e²` term.
    fn omega_leading(&self, mode: Mode) -> f64 {
        let s = match mode {
            Mode::Y => &self.omega_y_series,
            Mode::Z => &self.omega_z_series,
        };
        s[0] + s[2] * self.e() * self.e()
    }

    /// Detuning of the frequency series, `Ω_y(e) - Ω_z(e)`.
    pub fn series_detuning(&self) -> f64 {
        self.omega_eval(Mode::Y) - self.omega_eval(Mode::Z)
    }

    pub fn quadratic(&self) -> (f64, f64, f64, f64) {
        let e = self.e();
        (self.alpha.at(e), self.beta.at(e), self.sigma.at(e), self.tau.at(e))
    }

    pub fn cm_hamiltonian(&self, jy: f64, jz: f64, psi: f64) -> f64 {
        let (al, be, si, ta) = self.quadratic();
        let c2 = cos(2.0 * psi);
        let linear = self.omega_eval(Mode::Y) * jy + self.omega_eval(Mode::Z) * jz;
        let k2 = al * jy * jy + be * jz * jz + jy * jz * (si + 2.0 * ta * c2);
        let k4 = self.alpha1 * jy * jy * jy
            + self.beta1 * jz * jz * jz
            + self.sigma1 * jy * jy * jz
            + self.sigma2 * jy * jz * jz
            + 2.0 * (self.tau1 * jy * jy * jz + self.tau2 * jy * jz * jz) * c2;
        linear + k2 + k4
    }

    /// Hamilton's equations of [`Self::cm_hamiltonian`]. `J̇_z` is exactly
    /// `-J̇_y`.
    pub fn cm_flow_rhs(&self, jy: f64, jz: f64, theta_y: f64, theta_z: f64) -> CmFlow {
        let (al, be, si, ta) = self.quadratic();
        let (s2, c2) = sin_cos(2.0 * (theta_y - theta_z));
        let jy_dot = 4.0 * jy * jz * (ta + self.tau1 * jy + self.tau2 * jz) * s2;
        let theta_y_dot = self.omega_eval(Mode::Y)
            + 2.0 * al * jy
            + si * jz
            + 2.0 * ta * jz * c2
            + 3.0 * self.alpha1 * jy * jy
            + 2.0 * self.sigma1 * jy * jz
            + self.sigma2 * jz * jz
            + 2.0 * (2.0 * self.tau1 * jy * jz + self.tau2 * jz * jz) * c2;
        let theta_z_dot = self.omega_eval(Mode::Z)
            + 2.0 * be * jz
            + si * jy
            + 2.0 * ta * jy * c2
            + 3.0 * self.beta1 * jz * jz
            + self.sigma1 * jy * jy
            + 2.0 * self.sigma2 * jy * jz
            + 2.0 * (self.tau1 * jy * jy + 2.0 * self.tau2 * jy * jz) * c2;
        CmFlow { jy_dot, jz_dot: -jy_dot, theta_y_dot, theta_z_dot }
    }

    /// Nonlinear frequency of a normal mode (the other action zero).
    pub fn kappa(&self, mode: Mode, j: f64, order: KappaOrder) -> f64 {
        match mode {
            Mode::Y => self.kappa_pair(j, 0.0, order).0,
            Mode::Z => self.kappa_pair(0.0, j, order).1,
        }
    }

    /// Angle rates `(κ_y, κ_z)` of the phase-averaged normal form, used for
    /// Lissajous motion.
    pub fn kappa_pair(&self, jy: f64, jz: f64, order: KappaOrder) -> (f64, f64) {
        match order {
            KappaOrder::Leading => (
                self.omega_leading(Mode::Y) + 2.0 * self.alpha.constant * jy + self.sigma.constant * jz,
                self.omega_leading(Mode::Z) + 2.0 * self.beta.constant * jz + self.sigma.constant * jy,
            ),
            KappaOrder::Full => {
                let (al, be, si, _) = self.quadratic();
                (
                    self.omega_eval(Mode::Y)
                        + 2.0 * al * jy
                        + si * jz
                        + 3.0 * self.alpha1 * jy * jy
                        + 2.0 * self.sigma1 * jy * jz
                        + self.sigma2 * jz * jz,
                    self.omega_eval(Mode::Z)
                        + 2.0 * be * jz
                        + si * jy
                        + 3.0 * self.beta1 * jz * jz
                        + self.sigma1 * jy * jy
                        + 2.0 * self.sigma2 * jy * jz,
                )
            }
        }
    }

    /// Smallest action in `[0, max_action]` with `κ(J) = target`.
    pub fn amplitude_for_resonance(&self, mode: Mode, target: f64, order: KappaOrder, max_action: f64) -> Result<f64> {
        if !(max_action > 0.0) || !target.is_finite() {
            return Err(Error::OutOfDomain("resonance search needs a finite target and positive bracket"));
        }
        let g = |j: f64| self.kappa(mode, j, order) - target;
        const SCAN: usize = 256;
        let mut lo = 0.0;
        let mut g_lo = g(lo);
        if g_lo == 0.0 {
            return Ok(0.0);
        }
        for k in 1..=SCAN {
            let hi = max_action * k as f64 / SCAN as f64;
            let g_hi = g(hi);
            if g_hi == 0.0 {
                return Ok(hi);
            }
            if g_lo.signum() != g_hi.signum() {
                return brent(|j| Ok(g(j)), lo, hi, 1e-16, 1e-14, 200, "resonant amplitude");
            }
            lo = hi;
            g_lo = g_hi;
        }
        Err(Error::ResonanceUnreachable { target, max_action })
    }

    pub fn reduced_coeffs(&self) -> ReducedCoeffs {
        let (al, be, si, ta) = self.quadratic();
        ReducedCoeffs { a: al + be - si, b: be, c: si - 2.0 * be, d: -2.0 * ta }
    }

    /// Hamiltonian in `(E, R, ψ)` with `J_y = R`, `J_z = E - R`. The
    /// quadratic part is the `(a, b, c, d)` form; the cubic terms of the
    /// normal form are carried along unchanged.
    pub fn reduced_hamiltonian(&self, ecal: f64, r: f64, psi: f64) -> Result<f64> {
        if !(r >= 0.0 && r <= ecal) {
            return Err(Error::OutOfDomain("R must lie in [0, E]"));
        }
        let ReducedCoeffs { a, b, c, d } = self.reduced_coeffs();
        let c2 = cos(2.0 * psi);
        let quadratic = self.omega_eval(Mode::Z) * ecal
            + self.series_detuning() * r
            + a * r * r
            + b * ecal * ecal
            + c * ecal * r
            + d * (r * r - ecal * r) * c2;
        let (jy, jz) = (r, ecal - r);
        let cubic = self.alpha1 * jy * jy * jy
            + self.beta1 * jz * jz * jz
            + self.sigma1 * jy * jy * jz
            + self.sigma2 * jy * jz * jz
            + 2.0 * (self.tau1 * jy * jy * jz + self.tau2 * jy * jz * jz) * c2;
        Ok(quadratic + cubic)
    }

    /// `ψ̇` of the quadratic reduced flow.
    pub fn psi_dot(&self, ecal: f64, r: f64, psi: f64) -> f64 {
        let ReducedCoeffs { a, c, d, .. } = self.reduced_coeffs();
        self.series_detuning() + 2.0 * a * r + c * ecal + d * (2.0 * r - ecal) * cos(2.0 * psi)
    }

    /// `Ṙ` of the quadratic reduced flow.
    pub fn r_dot(&self, ecal: f64, r: f64, psi: f64) -> f64 {
        let d = self.reduced_coeffs().d;
        2.0 * d * r * (r - ecal) * sin(2.0 * psi)
    }

    /// Total action at which the halo family leaves the planar mode
    /// (`R_eq = E`).
    pub fn halo_birth_action(&self) -> Result<f64> {
        let ReducedCoeffs { a, c, d, .. } = self.reduced_coeffs();
        let den = 2.0 * a + c - d;
        if den == 0.0 {
            return Err(Error::DegenerateDenominator("halo birth action"));
        }
        Ok(-self.series_detuning() / den)
    }

    /// Halo bifurcation energy in local energy units.
    ///
    /// The numerator `Ω_z δ` is expanded through `e²` from the frequency
    /// series around the exact linear frequencies; the denominator is
    /// `σ - 2α - τ` at zero eccentricity.
    pub fn halo_bifurcation_energy(&self) -> Result<BifurcationEnergy> {
        let den = self.sigma.constant - 2.0 * self.alpha.constant - self.tau.constant;
        if den.abs() < 1e-300 {
            return Err(Error::DegenerateDenominator("halo bifurcation energy"));
        }
        let wz = self.linear_omega_z;
        let delta0 = self.delta;
        let wz2 = self.omega_z_series[2];
        let delta2 = self.omega_y_series[2] - self.omega_z_series[2];
        let constant = wz * delta0 / den;
        let e2_coefficient = (wz2 * delta0 + wz * delta2) / den;
        let e = self.e();
        Ok(BifurcationEnergy { constant, e2_coefficient, e, value: constant + e2_coefficient * e * e })
    }

    /// Converts a local energy to the total action `E = energy / Ω_z`.
    pub fn action_from_energy(&self, energy: f64) -> f64 {
        energy / self.omega_eval(Mode::Z)
    }

    /// Halo equilibrium of the reduced flow at total action `ecal`.
    pub fn halo_equilibrium(&self, ecal: f64, branch: HaloBranch) -> Result<HaloSolution> {
        if !(ecal > 0.0) {
            return Err(Error::OutOfDomain("total action must be positive"));
        }
        let ReducedCoeffs { a, b, c, d } = self.reduced_coeffs();
        // ψ̇ = δ + 2aR + cE + d(2R - E)cos2ψ is linear in R; at cos2ψ = -1
        // the slope is 2(a - d).
        let slope = 2.0 * (a - d);
        if slope == 0.0 {
            return Err(Error::DegenerateDenominator("halo equilibrium"));
        }
        let r_eq = -(self.series_detuning() + (c + d) * ecal) / slope;
        if !(r_eq >= 0.0 && r_eq <= ecal) {
            return Err(Error::NoHalo { ecal, r_eq });
        }
        let omega_h = self.omega_eval(Mode::Z) + 2.0 * b * ecal + c * r_eq + d * r_eq;
        Ok(HaloSolution {
            ecal,
            r_eq,
            jy_halo: 0.5 * (ecal + r_eq),
            jz_halo: 0.5 * (ecal - r_eq),
            omega_h,
            branch,
        })
    }

    /// `∂K/∂E` of the quadratic reduced Hamiltonian at fixed `R`, by central
    /// differences; a check on [`HaloSolution::omega_h`].
    pub fn omega_h_finite_difference(&self, ecal: f64, r: f64, psi: f64, h: f64) -> f64 {
        let k = |e: f64| {
            let ReducedCoeffs { a, b, c, d } = self.reduced_coeffs();
            self.omega_eval(Mode::Z) * e
                + self.series_detuning() * r
                + a * r * r
                + b * e * e
                + c * e * r
                + d * (r * r - e * r) * cos(2.0 * psi)
        };
        (k(ecal + h) - k(ecal - h)) / (2.0 * h)
    }
}
