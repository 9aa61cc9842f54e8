//! Analytic orbits from the coordinate series: angle laws for each family,
//! sampling on an anomaly grid, and approximate initial conditions.
//!
//! The coordinate series give synodic pulsating coordinates directly; local
//! coordinates are obtained through the collinear frame.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::center_manifold::{CMModel, HaloBranch, KappaOrder, Mode};
use crate::dynamics::PulsatingState;
use crate::error::{Error, Result};
use crate::fmath::{atan2, cos, pow, sin, sin_cos, sqrt};
use crate::geometry::CollinearFrame;
use crate::series::{GeneratingFunction, GeneratingFunctionTable, OrbitSeriesTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    Planar,
    Vertical,
    Halo,
    Lissajous,
}

/// Anomaly used as the argument of the normal-form angles. Explicit
/// `f`-harmonics of the series always use the true anomaly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AnomalyModel {
    True,
    #[default]
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnalyticOrbitSpec {
    pub family: Family,
    pub jy: f64,
    pub jz: f64,
    pub theta_y0: f64,
    pub theta_z0: f64,
    pub anomaly_model: AnomalyModel,
    pub kappa_order: KappaOrder,
    /// Fixed angle rates overriding the normal-form frequencies, e.g. an
    /// exact resonance `m/n`.
    pub rates: Option<[f64; 2]>,
    pub branch: HaloBranch,
    pub f_start: f64,
    pub f_end: f64,
    pub samples: usize,
}

impl AnalyticOrbitSpec {
    fn base(family: Family, jy: f64, jz: f64) -> Self {
        Self {
            family,
            jy,
            jz,
            theta_y0: 0.0,
            theta_z0: 0.0,
            anomaly_model: AnomalyModel::default(),
            kappa_order: KappaOrder::default(),
            rates: None,
            branch: HaloBranch::North,
            f_start: 0.0,
            f_end: TAU,
            samples: 721,
        }
    }

    pub fn planar(jy: f64) -> Self {
        Self::base(Family::Planar, jy, 0.0)
    }

    pub fn vertical(jz: f64) -> Self {
        Self::base(Family::Vertical, 0.0, jz)
    }

    pub fn lissajous(jy: f64, jz: f64) -> Self {
        Self::base(Family::Lissajous, jy, jz)
    }

    /// Halo orbit at total action `ecal`, with the action split of the
    /// reduced equilibrium.
    pub fn halo(model: &CMModel, ecal: f64, branch: HaloBranch) -> Result<Self> {
        let sol = model.halo_equilibrium(ecal, branch)?;
        let mut spec = Self::base(Family::Halo, sol.jy_halo, sol.jz_halo);
        spec.branch = branch;
        Ok(spec)
    }

    /// Normal mode locked to the rational frequency `m/n`. The mode's rate is
    /// set to `m/n` exactly; the amplitude solves the frequency relation.
    pub fn resonant(
        model: &CMModel,
        family: Family,
        m: u32,
        n: u32,
        order: KappaOrder,
        max_action: f64,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::OutOfDomain("resonance m:n needs positive integers"));
        }
        let target = m as f64 / n as f64;
        let mut spec = match family {
            Family::Planar => Self::planar(model.amplitude_for_resonance(Mode::Y, target, order, max_action)?),
            Family::Vertical => Self::vertical(model.amplitude_for_resonance(Mode::Z, target, order, max_action)?),
            _ => return Err(Error::OutOfDomain("resonances apply to planar and vertical modes")),
        };
        spec.kappa_order = order;
        let (ky, kz) = model.kappa_pair(spec.jy, spec.jz, order);
        spec.rates = Some(match family {
            Family::Planar => [target, kz],
            _ => [ky, target],
        });
        spec.f_end = TAU * n as f64;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.jy >= 0.0 && self.jz >= 0.0) {
            return Err(Error::OutOfDomain("actions must be non-negative"));
        }
        match self.family {
            Family::Planar if self.jz != 0.0 => Err(Error::OutOfDomain("planar orbits need Jz = 0")),
            Family::Vertical if self.jy != 0.0 => Err(Error::OutOfDomain("vertical orbits need Jy = 0")),
            _ if self.samples < 2 => Err(Error::OutOfDomain("at least two samples are needed")),
            _ if !(self.f_start.is_finite() && self.f_end.is_finite()) => {
                Err(Error::OutOfDomain("anomaly range must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn anomaly_grid(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.f_end
                } else {
                    self.f_start + (self.f_end - self.f_start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Eccentric anomaly continued across branches of `f`.
fn eccentric_anomaly(f: f64, e: f64) -> f64 {
    let k = libm::round(f / TAU);
    let fr = f - k * TAU;
    let (s, c) = sin_cos(0.5 * fr);
    2.0 * atan2(sqrt(1.0 - e) * s, sqrt(1.0 + e) * c) + k * TAU
}

/// Mean anomaly `ℓ(f)` and `dℓ/df`.
pub fn mean_anomaly(f: f64, e: f64) -> (f64, f64) {
    let big_e = eccentric_anomaly(f, e);
    let ell = big_e - e * sin(big_e);
    let den = 1.0 + e * cos(f);
    (ell, pow(1.0 - e * e, 1.5) / (den * den))
}

/// Angles and their `f`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub theta_y: f64,
    pub theta_z: f64,
    pub theta_y_rate: f64,
    pub theta_z_rate: f64,
}

/// Halo frequency `∂K/∂E` for the action split `(jy, jz)`.
fn halo_rate(model: &CMModel, jy: f64, jz: f64) -> f64 {
    let r = model.reduced_coeffs();
    let (ecal, rr) = (jy + jz, jy - jz);
    model.omega_eval(Mode::Z) + 2.0 * r.b * ecal + (r.c + r.d) * rr
}

pub fn angles_of(spec: &AnalyticOrbitSpec, model: &CMModel, f: f64) -> Angles {
    let (arg, darg) = match spec.anomaly_model {
        AnomalyModel::True => (f, 1.0),
        AnomalyModel::Mean => mean_anomaly(f, model.e()),
    };
    match spec.family {
        Family::Halo => {
            let w = spec.rates.map_or_else(|| halo_rate(model, spec.jy, spec.jz), |r| r[0]);
            let theta_y = w * arg + spec.theta_y0;
            Angles {
                theta_y,
                theta_z: theta_y - spec.branch.psi(),
                theta_y_rate: w * darg,
                theta_z_rate: w * darg,
            }
        }
        _ => {
            let [ky, kz] = spec.rates.unwrap_or_else(|| {
                let (a, b) = model.kappa_pair(spec.jy, spec.jz, spec.kappa_order);
                [a, b]
            });
            Angles {
                theta_y: ky * arg + spec.theta_y0,
                theta_z: kz * arg + spec.theta_z0,
                theta_y_rate: ky * darg,
                theta_z_rate: kz * darg,
            }
        }
    }
}

/// Synodic pulsating coordinates from the series.
pub fn eval_series(
    table: &OrbitSeriesTable,
    jy: f64,
    jz: f64,
    theta_y: f64,
    theta_z: f64,
    f: f64,
    e: f64,
) -> [f64; 3] {
    table.eval(jy, jz, theta_y, theta_z, f, e)
}

#[allow(clippy::too_many_arguments)]
pub fn eval_generating_function(
    table: &GeneratingFunctionTable,
    which: GeneratingFunction,
    jy: f64,
    jz: f64,
    theta_y: f64,
    theta_z: f64,
    f: f64,
    e: f64,
) -> f64 {
    table.table(which).eval(jy, jz, theta_y, theta_z, f, e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnalyticSample {
    pub f: f64,
    pub local: [f64; 3],
    pub synodic: [f64; 3],
    /// Synodic velocity `d/df`.
    pub velocity: [f64; 3],
}

impl AnalyticSample {
    pub fn state(&self) -> PulsatingState {
        PulsatingState::new(self.synodic, self.velocity, self.f)
    }
}

/// Position and velocity of the analytic orbit at anomaly `f`.
pub fn sample_at(
    spec: &AnalyticOrbitSpec,
    model: &CMModel,
    table: &OrbitSeriesTable,
    frame: &CollinearFrame,
    f: f64,
) -> AnalyticSample {
    let ang = angles_of(spec, model, f);
    let parts = table.eval_with_partials(spec.jy, spec.jz, ang.theta_y, ang.theta_z, f, model.e());
    let synodic = parts.map(|p| p.value);
    let velocity = parts.map(|p| p.d_theta_y * ang.theta_y_rate + p.d_theta_z * ang.theta_z_rate + p.d_f);
    AnalyticSample { f, local: frame.local_from_synodic(synodic), synodic, velocity }
}

pub fn synthesize(
    spec: &AnalyticOrbitSpec,
    model: &CMModel,
    table: &OrbitSeriesTable,
    frame: &CollinearFrame,
) -> Result<Vec<AnalyticSample>> {
    spec.validate()?;
    Ok(spec.anomaly_grid().into_iter().map(|f| sample_at(spec, model, table, frame, f)).collect())
}

/// Approximate initial condition at anomaly `f0`.
pub fn aic_from_series(
    spec: &AnalyticOrbitSpec,
    model: &CMModel,
    table: &OrbitSeriesTable,
    frame: &CollinearFrame,
    f0: f64,
) -> Result<PulsatingState> {
    spec.validate()?;
    Ok(sample_at(spec, model, table, frame, f0).state())
}

/// Initial phase placing a planar orbit on the `Y = 0` section at `f = 0`,
/// on the side nearer the larger primary.
pub const SYMMETRIC_PHASE: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use core::f64::consts::FRAC_PI_2;

    fn setup(e: f64) -> (CMModel, OrbitSeriesTable, CollinearFrame) {
        let model = CMModel::earth_moon_l1(e).unwrap();
        let frame = CollinearFrame::new(Point::L1, model.params.mu).unwrap();
        (model, OrbitSeriesTable::earth_moon_l1().unwrap(), frame)
    }

    #[test]
    fn mean_anomaly_is_continuous_and_monotone() {
        let e = 0.3;
        let mut prev = mean_anomaly(-7.0, e).0;
        for k in 1..=1400 {
            let f = -7.0 + 0.01 * k as f64;
            let (ell, rate) = mean_anomaly(f, e);
            assert!(ell > prev && rate > 0.0);
            assert!(ell - prev < 0.05);
            prev = ell;
        }
        let h = 1e-6;
        let (_, rate) = mean_anomaly(1.1, e);
        let fd = (mean_anomaly(1.1 + h, e).0 - mean_anomaly(1.1 - h, e).0) / (2.0 * h);
        assert!((rate - fd).abs() < 1e-8);
        assert_eq!(mean_anomaly(0.0, e).0, 0.0);
    }

    #[test]
    fn halo_angles_keep_phase_lock() {
        let (model, _, _) = setup(0.0549);
        let spec = AnalyticOrbitSpec::halo(&model, 0.14, HaloBranch::North).unwrap();
        for f in [0.0, 0.7, 3.0, -2.0] {
            let a = angles_of(&spec, &model, f);
            assert!((a.theta_y - a.theta_z - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_phases_at_zero_anomaly() {
        let (model, _, _) = setup(0.0549);
        let mut spec = AnalyticOrbitSpec::lissajous(0.3, 0.2);
        spec.theta_y0 = 0.4;
        spec.theta_z0 = -1.2;
        let a = angles_of(&spec, &model, 0.0);
        assert_eq!((a.theta_y, a.theta_z), (0.4, -1.2));
    }

    #[test]
    fn resonant_planar_spec_uses_exact_rate() {
        let (model, _, _) = setup(0.0549);
        let spec = AnalyticOrbitSpec::resonant(&model, Family::Planar, 2, 1, KappaOrder::Full, 5.0).unwrap();
        let mut s = spec;
        s.anomaly_model = AnomalyModel::True;
        assert_eq!(angles_of(&s, &model, 1.0).theta_y_rate, 2.0);
    }

    #[test]
    fn velocity_matches_finite_differences() {
        let (model, table, frame) = setup(0.0549);
        for anomaly in [AnomalyModel::True, AnomalyModel::Mean] {
            let mut spec = AnalyticOrbitSpec::lissajous(0.5, 0.3);
            spec.anomaly_model = anomaly;
            spec.theta_y0 = 0.3;
            let h = 1e-6;
            let s = sample_at(&spec, &model, &table, &frame, 0.8);
            let a = sample_at(&spec, &model, &table, &frame, 0.8 + h);
            let b = sample_at(&spec, &model, &table, &frame, 0.8 - h);
            for i in 0..3 {
                let fd = (a.synodic[i] - b.synodic[i]) / (2.0 * h);
                assert!((s.velocity[i] - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn planar_aic_sits_on_the_symmetry_section() {
        let (model, table, frame) = setup(0.0549);
        let mut spec = AnalyticOrbitSpec::resonant(&model, Family::Planar, 2, 1, KappaOrder::Full, 5.0).unwrap();
        spec.theta_y0 = SYMMETRIC_PHASE;
        let s = aic_from_series(&spec, &model, &table, &frame, 0.0).unwrap();
        assert!(s.y.abs() < 1e-15 && s.xp.abs() < 1e-15);
        assert_eq!((s.z, s.zp), (0.0, 0.0));
        assert!(s.yp < 0.0);
    }

    #[test]
    fn vertical_aic_moves_out_of_plane() {
        let (model, table, frame) = setup(0.2);
        let spec = AnalyticOrbitSpec::vertical(0.9775);
        let s = aic_from_series(&spec, &model, &table, &frame, 0.0).unwrap();
        assert!(s.zp != 0.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = AnalyticOrbitSpec::planar(0.4);
        spec.jz = 0.1;
        assert!(spec.validate().is_err());
        assert!(AnalyticOrbitSpec::vertical(-1.0).validate().is_err());
    }
}
