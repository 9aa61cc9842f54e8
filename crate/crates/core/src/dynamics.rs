//! Equations of motion in the rotating-pulsating frame, with the true anomaly
//! `f` as independent variable and the dummy action `F` carried along as a
//! seventh component so that `H + F` is a conserved quantity.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::{cos, sin_cos, sqrt};
use crate::geometry::SystemParams;
use crate::integrator::{self, Crossing, Event, IntegratorOptions, OdeSystem, Stats};

/// Integration aborts once either primary is closer than this.
pub const COLLISION_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulsatingState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xp: f64,
    pub yp: f64,
    pub zp: f64,
    pub f: f64,
}

impl PulsatingState {
    pub fn new(position: [f64; 3], velocity: [f64; 3], f: f64) -> Self {
        Self {
            x: position[0],
            y: position[1],
            z: position[2],
            xp: velocity[0],
            yp: velocity[1],
            zp: velocity[2],
            f,
        }
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn velocity(&self) -> [f64; 3] {
        [self.xp, self.yp, self.zp]
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.xp, self.yp, self.zp]
    }

    pub fn from_array(s: [f64; 6], f: f64) -> Self {
        Self::new([s[0], s[1], s[2]], [s[3], s[4], s[5]], f)
    }

    /// Canonical momenta `(p_X, p_Y, p_Z)` conjugate to the coordinates.
    pub fn momenta(&self) -> [f64; 3] {
        [self.xp - self.y, self.yp + self.x, self.zp]
    }
}

/// Phase-space point extended by the action `F` conjugate to `f`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtendedState {
    pub state: PulsatingState,
    pub dummy_action: f64,
}

impl ExtendedState {
    pub fn new(state: PulsatingState, dummy_action: f64) -> Self {
        Self { state, dummy_action }
    }

    /// Initializes `F = -H` so the extended Hamiltonian starts at zero.
    pub fn with_null_action(state: PulsatingState, params: &SystemParams) -> Result<Self> {
        let h = hamiltonian(&state, params)?;
        Ok(Self { state, dummy_action: -h })
    }

    pub fn to_vector(&self) -> [f64; 7] {
        let s = &self.state;
        [s.x, s.y, s.z, s.xp, s.yp, s.zp, self.dummy_action]
    }

    pub fn from_vector(v: &[f64; 7], f: f64) -> Self {
        Self {
            state: PulsatingState::new([v[0], v[1], v[2]], [v[3], v[4], v[5]], f),
            dummy_action: v[6],
        }
    }
}

/// Distances to the larger primary at `(mu, 0, 0)` and the smaller one at
/// `(mu - 1, 0, 0)`.
#[inline]
pub fn primary_distances(mu: f64, x: f64, y: f64, z: f64) -> (f64, f64) {
    let rho2 = y * y + z * z;
    let dx1 = x - mu;
    let dx2 = x - mu + 1.0;
    (sqrt(dx1 * dx1 + rho2), sqrt(dx2 * dx2 + rho2))
}

#[inline]
fn guard(mu: f64, x: f64, y: f64, z: f64, f: f64) -> Result<(f64, f64)> {
    let (r1, r2) = primary_distances(mu, x, y, z);
    let closest = r1.min(r2);
    if !(closest >= COLLISION_RADIUS) {
        return Err(Error::Collision { f, distance: closest });
    }
    Ok((r1, r2))
}

/// `W = (X²+Y²+Z²)/2 + (1-mu)/r1 + mu/r2 + mu(1-mu)/2`.
pub fn effective_potential_w(x: f64, y: f64, z: f64, mu: f64) -> Result<f64> {
    let (r1, r2) = guard(mu, x, y, z, 0.0)?;
    Ok(w_with_distances(x, y, z, mu, r1, r2))
}

#[inline]
fn w_with_distances(x: f64, y: f64, z: f64, mu: f64, r1: f64, r2: f64) -> f64 {
    0.5 * (x * x + y * y + z * z) + (1.0 - mu) / r1 + mu / r2 + 0.5 * mu * (1.0 - mu)
}

/// Gradient of `W`.
pub fn effective_potential_gradient(x: f64, y: f64, z: f64, mu: f64) -> Result<[f64; 3]> {
    let (r1, r2) = guard(mu, x, y, z, 0.0)?;
    Ok(w_gradient_with_distances(x, y, z, mu, r1, r2))
}

#[inline]
fn w_gradient_with_distances(x: f64, y: f64, z: f64, mu: f64, r1: f64, r2: f64) -> [f64; 3] {
    let k1 = (1.0 - mu) / (r1 * r1 * r1);
    let k2 = mu / (r2 * r2 * r2);
    [x - k1 * (x - mu) - k2 * (x - mu + 1.0), y * (1.0 - k1 - k2), z * (1.0 - k1 - k2)]
}

/// Pulsation factor `1/(1 + e cos f)`.
#[inline]
pub fn pulsation(e: f64, f: f64) -> f64 {
    1.0 / (1.0 + e * cos(f))
}

/// `Omega = W / (1 + e cos f)`.
pub fn omega_potential(x: f64, y: f64, z: f64, f: f64, params: &SystemParams) -> Result<f64> {
    let (r1, r2) = guard(params.mu, x, y, z, f)?;
    Ok(w_with_distances(x, y, z, params.mu, r1, r2) * pulsation(params.e, f))
}

pub fn omega_gradient(x: f64, y: f64, z: f64, f: f64, params: &SystemParams) -> Result<[f64; 3]> {
    let (r1, r2) = guard(params.mu, x, y, z, f)?;
    let k = pulsation(params.e, f);
    let g = w_gradient_with_distances(x, y, z, params.mu, r1, r2);
    Ok([g[0] * k, g[1] * k, g[2] * k])
}

/// Derivative of `(X, Y, Z, X', Y', Z', F)` with respect to `f`.
pub fn eom_rhs(extended: &ExtendedState, params: &SystemParams) -> Result<[f64; 7]> {
    let v = extended.to_vector();
    rhs_vector(extended.state.f, &v, params)
}

#[inline]
fn rhs_vector(f: f64, v: &[f64; 7], params: &SystemParams) -> Result<[f64; 7]> {
    let (x, y, z) = (v[0], v[1], v[2]);
    let (r1, r2) = guard(params.mu, x, y, z, f)?;
    let (sf, cf) = sin_cos(f);
    let k = 1.0 / (1.0 + params.e * cf);
    let g = w_gradient_with_distances(x, y, z, params.mu, r1, r2);
    let action_rate = if params.e == 0.0 {
        0.0
    } else {
        params.e * sf * k * k * w_with_distances(x, y, z, params.mu, r1, r2)
    };
    Ok([
        v[3],
        v[4],
        v[5],
        2.0 * v[4] + k * g[0],
        -2.0 * v[3] + k * g[1],
        -z + k * g[2],
        action_rate,
    ])
}

/// `H = (X'²+Y'²+Z'²)/2 + Z²/2 - Omega`, the momentum-form Hamiltonian
/// written in velocities.
pub fn hamiltonian(state: &PulsatingState, params: &SystemParams) -> Result<f64> {
    let omega = omega_potential(state.x, state.y, state.z, state.f, params)?;
    let [xp, yp, zp] = state.velocity();
    Ok(0.5 * (xp * xp + yp * yp + zp * zp) + 0.5 * state.z * state.z - omega)
}

/// Same value as [`hamiltonian`], evaluated from the canonical momenta.
pub fn hamiltonian_canonical(position: [f64; 3], momenta: [f64; 3], f: f64, params: &SystemParams) -> Result<f64> {
    let [x, y, z] = position;
    let [px, py, pz] = momenta;
    let omega = omega_potential(x, y, z, f, params)?;
    Ok(0.5 * (px * px + py * py + pz * pz) + y * px - x * py + 0.5 * (x * x + y * y + z * z) - omega)
}

/// `H + F`; constant along solutions of [`eom_rhs`].
pub fn extended_hamiltonian(extended: &ExtendedState, params: &SystemParams) -> Result<f64> {
    Ok(hamiltonian(&extended.state, params)? + extended.dummy_action)
}

/// Jacobi-form quantity `2 Omega - |v|² - Z²`, i.e. `-2H`. On the plane
/// `Z = 0` it reduces to `2 Omega - |v|²`; at `e = 0` it is the classical
/// Jacobi constant.
pub fn jacobi_form(state: &PulsatingState, params: &SystemParams) -> Result<f64> {
    Ok(-2.0 * hamiltonian(state, params)?)
}

/// The seven-component system as seen by the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsatingSystem {
    pub params: SystemParams,
}

impl OdeSystem<7> for PulsatingSystem {
    #[inline]
    fn rhs(&self, f: f64, y: &[f64; 7]) -> Result<[f64; 7]> {
        rhs_vector(f, y, &self.params)
    }
}

/// Zero of `state[component] - level`, e.g. component 1 for `Y = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlaneEvent {
    pub id: usize,
    pub component: usize,
    pub level: f64,
    pub crossing: CrossingKind,
    pub window: Option<(f64, f64)>,
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CrossingKind {
    Rising,
    Falling,
    Either,
}

impl From<CrossingKind> for Crossing {
    fn from(kind: CrossingKind) -> Self {
        match kind {
            CrossingKind::Rising => Crossing::Rising,
            CrossingKind::Falling => Crossing::Falling,
            CrossingKind::Either => Crossing::Either,
        }
    }
}

impl PlaneEvent {
    /// Crossing of the `Y = 0` plane.
    pub fn y_crossing(id: usize, crossing: CrossingKind) -> Self {
        Self { id, component: 1, level: 0.0, crossing, window: None, terminal: false }
    }

    pub fn within(mut self, from: f64, to: f64) -> Self {
        self.window = Some((from, to));
        self
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Sampling {
    /// One sample per accepted integrator step.
    #[default]
    Steps,
    /// `n >= 2` equally spaced anomalies including both ends.
    Uniform(usize),
    /// Explicit anomalies; those outside the span are dropped.
    At(Vec<f64>),
    /// Only the end point.
    EndOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryEvent {
    pub id: usize,
    pub f: f64,
    pub state: ExtendedState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<ExtendedState>,
    pub events: Vec<TrajectoryEvent>,
    /// State where integration stopped (the end point or a terminal event).
    pub last: ExtendedState,
    pub stats: Stats,
}

impl Trajectory {
    pub fn first_event(&self, id: usize) -> Option<&TrajectoryEvent> {
        self.events.iter().find(|e| e.id == id)
    }

    /// Largest deviation of `H + F` from its value at the first sample.
    pub fn extended_hamiltonian_drift(&self, params: &SystemParams) -> Result<f64> {
        let Some(first) = self.samples.first() else { return Ok(0.0) };
        let h0 = extended_hamiltonian(first, params)?;
        let mut worst: f64 = 0.0;
        for s in self.samples.iter().chain(core::iter::once(&self.last)) {
            worst = worst.max((extended_hamiltonian(s, params)? - h0).abs());
        }
        Ok(worst)
    }
}

/// Integrates from `initial` to anomaly `f_end` (forward or backward).
pub fn integrate(
    initial: &ExtendedState,
    f_end: f64,
    params: &SystemParams,
    options: &IntegratorOptions,
    sampling: &Sampling,
    events: &[PlaneEvent],
) -> Result<Trajectory> {
    let system = PulsatingSystem { params: *params };
    let f0 = initial.state.f;
    let y0 = initial.to_vector();

    let mut opts = *options;
    opts.record_steps = matches!(sampling, Sampling::Steps);
    let grid: Vec<f64> = match sampling {
        Sampling::Uniform(n) => {
            let n = (*n).max(2);
            (0..n).map(|i| if i + 1 == n { f_end } else { f0 + (f_end - f0) * i as f64 / (n - 1) as f64 }).collect()
        }
        Sampling::At(points) => points.clone(),
        Sampling::Steps | Sampling::EndOnly => Vec::new(),
    };

    let conditions: Vec<(usize, f64)> = events.iter().map(|e| (e.component, e.level)).collect();
    let closures: Vec<_> = conditions
        .iter()
        .map(|&(component, level)| move |_t: f64, y: &[f64; 7]| y[component] - level)
        .collect();
    let mut specs = Vec::with_capacity(events.len());
    for (ev, cond) in events.iter().zip(closures.iter()) {
        if ev.component >= 7 {
            return Err(Error::InvalidOption("event component out of range"));
        }
        specs.push(Event {
            id: ev.id,
            condition: cond as &dyn Fn(f64, &[f64; 7]) -> f64,
            crossing: ev.crossing.into(),
            window: ev.window,
            terminal: ev.terminal,
        });
    }

    let sol = integrator::integrate(&system, f0, y0, f_end, &opts, &grid, &specs)?;
    let to_ext = |(t, v): &(f64, [f64; 7])| ExtendedState::from_vector(v, *t);
    let mut samples: Vec<ExtendedState> = match sampling {
        Sampling::Steps => sol.steps.iter().map(to_ext).collect(),
        Sampling::EndOnly => Vec::new(),
        _ => sol.samples.iter().map(to_ext).collect(),
    };
    samples.dedup_by(|a, b| a.state.f == b.state.f);
    let events = sol
        .events
        .iter()
        .map(|hit| TrajectoryEvent { id: hit.id, f: hit.t, state: ExtendedState::from_vector(&hit.state, hit.t) })
        .collect();
    Ok(Trajectory {
        samples,
        events,
        last: ExtendedState::from_vector(&sol.y_final, sol.t_final),
        stats: sol.stats,
    })
}

/// Propagates a bare state, returning the state at `f_end`.
pub fn propagate(
    initial: &ExtendedState,
    f_end: f64,
    params: &SystemParams,
    options: &IntegratorOptions,
) -> Result<ExtendedState> {
    Ok(integrate(initial, f_end, params, options, &Sampling::EndOnly, &[])?.last)
}
