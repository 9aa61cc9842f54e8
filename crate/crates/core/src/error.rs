use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mass ratio {0} outside (0, 0.5]")]
    InvalidMassRatio(f64),
    #[error("eccentricity {0} outside [0, 1)")]
    InvalidEccentricity(f64),
    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NoSignChange { what: &'static str, lo: f64, hi: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("expansion order {0} is below 2")]
    OrderTooLow(usize),
    #[error("collision at f = {f} (distance to primary {distance:e})")]
    Collision { f: f64, distance: f64 },
    #[error("step size underflow at f = {f}")]
    StepSizeUnderflow { f: f64 },
    #[error("maximum number of steps exceeded at f = {f}")]
    MaxStepsExceeded { f: f64 },
    #[error("no {what} event in [{from}, {to}]")]
    EventNotFound { what: &'static str, from: f64, to: f64 },
    #[error("invalid integrator option: {0}")]
    InvalidOption(&'static str),
    #[error("c2 = {0} does not exceed 1; not a collinear point")]
    NotCollinear(f64),
    #[error("degenerate eigenvector normalization ({0})")]
    DegenerateNormalization(f64),
    #[error("argument out of domain: {0}")]
    OutOfDomain(&'static str),
    #[error("resonance {target} unreachable for amplitudes in [0, {max_action}]")]
    ResonanceUnreachable { target: f64, max_action: f64 },
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),
    #[error("no halo orbit at total action {ecal}: equilibrium R = {r_eq} outside [0, {ecal}]")]
    NoHalo { ecal: f64, r_eq: f64 },
    #[error("energy level unreachable at X0 = {x0}: radicand {radicand}")]
    NegativeRadicand { x0: f64, radicand: f64 },
    #[error("series table line {line}: {message}")]
    SeriesParse { line: usize, message: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
