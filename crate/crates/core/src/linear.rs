//! Quadratic part of the Hamiltonian at a collinear point.
//!
//! In local coordinates `(x, y, p_x, p_y)` the planar linear system is
//! `ξ' = M ξ` with
//!
//! ```text
//!       | 0     1    1   0 |
//!   M = | -1    0    0   1 |
//!       | 2c2   0    0   1 |
//!       | 0   -c2   -1   0 |
//! ```
//!
//! which is exactly Hamilton's equations for
//! `H2 = (p_x² + p_y²)/2 + y p_x - x p_y - c2 x² + c2 y²/2`.
//! The vertical pair decouples as `(p_z² + c2 z²)/2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fmath::{cos, pow, sin, sqrt};
use crate::geometry::{CollinearFrame, Point};

pub type Mat4 = [[f64; 4]; 4];

/// Standard symplectic form on `(q1, q2, p1, p2)`.
pub const J4: Mat4 = [
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearData {
    pub point: Point,
    pub mu: f64,
    pub c2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    pub lambda_x: f64,
    /// Detuning `omega_y - omega_z`.
    pub delta: f64,
}

pub fn linearize(point: Point, mu: f64) -> Result<LinearData> {
    let frame = CollinearFrame::with_max_order(point, mu, 2)?;
    linearize_frame(&frame)
}

pub fn linearize_frame(frame: &CollinearFrame) -> Result<LinearData> {
    from_c2(frame.point, frame.mu, frame.c_n(2)?)
}

/// Linear data for a given `c2 > 1`.
pub fn from_c2(point: Point, mu: f64, c2: f64) -> Result<LinearData> {
    if !(c2 > 1.0) {
        return Err(Error::NotCollinear(c2));
    }
    let disc = sqrt(9.0 * c2 * c2 - 8.0 * c2);
    let eta1 = 0.5 * (c2 - 2.0 - disc);
    let eta2 = 0.5 * (c2 - 2.0 + disc);
    let omega_y = sqrt(-eta1);
    let omega_z = sqrt(c2);
    Ok(LinearData {
        point,
        mu,
        c2,
        eta1,
        eta2,
        omega_y,
        omega_z,
        lambda_x: sqrt(eta2),
        delta: omega_y - omega_z,
    })
}

impl LinearData {
    /// Planar matrix `M` of the linear system.
    pub fn matrix(&self) -> Mat4 {
        let c2 = self.c2;
        [
            [0.0, 1.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 1.0],
            [2.0 * c2, 0.0, 0.0, 1.0],
            [0.0, -c2, -1.0, 0.0],
        ]
    }

    /// Block form the diagonalizer must produce, on `(x̃, ỹ, p̃x, p̃y)`.
    pub fn diagonal_matrix(&self) -> Mat4 {
        let (l, w) = (self.lambda_x, self.omega_y);
        [
            [l, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, w],
            [0.0, 0.0, -l, 0.0],
            [0.0, -w, 0.0, 0.0],
        ]
    }

    /// Full quadratic Hamiltonian at `(x, y, z, p_x, p_y, p_z)`.
    pub fn quadratic_hamiltonian(&self, s: [f64; 6]) -> f64 {
        let [x, y, z, px, py, pz] = s;
        let c2 = self.c2;
        0.5 * (px * px + py * py + pz * pz) + y * px - x * py - c2 * x * x + 0.5 * c2 * (y * y + z * z)
    }

    /// Eigenvector of `M` for a (possibly complex) eigenvalue `k`.
    pub fn eigenvector(&self, k: Complex64) -> [Complex64; 4] {
        let c2 = self.c2;
        let k2 = k * k;
        [
            k * 2.0,
            k2 - (2.0 * c2 + 1.0),
            k2 + (2.0 * c2 + 1.0),
            k2 * k + k * (1.0 - 2.0 * c2),
        ]
    }
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn mat_vec(a: &Mat4, v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

fn symplectic_product(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[2] + a[1] * b[3] - a[2] * b[0] - a[3] * b[1]
}

/// Symplectic map `ξ̃ = C ξ` bringing the planar quadratic part to
/// `λ x̃ p̃x + ω_y (ỹ² + p̃y²)/2`, plus the vertical rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizingMap {
    pub linear: LinearData,
    /// Old-to-new planar map `C`.
    pub c: Mat4,
    /// Its inverse `C⁻¹`, whose columns are the normalized eigenvectors.
    pub c_inv: Mat4,
    /// `c2^(1/4)`: `z̃ = s z`, `p̃z = p_z / s`.
    pub vertical_scale: f64,
}

pub fn build_diagonalizer(linear: &LinearData) -> Result<DiagonalizingMap> {
    let (l, w, c2) = (linear.lambda_x, linear.omega_y, linear.c2);
    let re = |v: [Complex64; 4]| [v[0].re, v[1].re, v[2].re, v[3].re];
    let im = |v: [Complex64; 4]| [v[0].im, v[1].im, v[2].im, v[3].im];

    let v_plus = re(linear.eigenvector(Complex64::new(l, 0.0)));
    let v_minus = re(linear.eigenvector(Complex64::new(-l, 0.0)));
    let d = symplectic_product(&v_plus, &v_minus);
    if !(d.abs() > 1e-12) || !d.is_finite() {
        return Err(Error::DegenerateNormalization(d));
    }
    let s1 = 1.0 / sqrt(d.abs());
    let x_col = v_plus.map(|v| v * s1);
    let px_col = v_minus.map(|v| v * s1 * d.signum());

    let vc = linear.eigenvector(Complex64::new(0.0, w));
    let (u0, w0) = (re(vc), im(vc));
    let dw = symplectic_product(&u0, &w0);
    if !(dw > 1e-12) || !dw.is_finite() {
        return Err(Error::DegenerateNormalization(dw));
    }
    let s2 = 1.0 / sqrt(dw);
    let y_col = u0.map(|v| v * s2);
    let py_col = w0.map(|v| v * s2);

    let mut p = [[0.0; 4]; 4];
    for i in 0..4 {
        p[i] = [x_col[i], y_col[i], px_col[i], py_col[i]];
    }
    // For symplectic P the inverse is -J Pᵀ J.
    let c = mat_mul(&mat_mul(&J4, &transpose(&p)), &J4).map(|row| row.map(|v| -v));
    Ok(DiagonalizingMap { linear: *linear, c, c_inv: p, vertical_scale: pow(c2, 0.25) })
}

impl DiagonalizingMap {
    /// `(x, y, p_x, p_y) -> (x̃, ỹ, p̃x, p̃y)`.
    pub fn to_modal(&self, xi: &[f64; 4]) -> [f64; 4] {
        mat_vec(&self.c, xi)
    }

    pub fn from_modal(&self, modal: &[f64; 4]) -> [f64; 4] {
        mat_vec(&self.c_inv, modal)
    }

    pub fn vertical_to_modal(&self, z: f64, pz: f64) -> (f64, f64) {
        (z * self.vertical_scale, pz / self.vertical_scale)
    }

    pub fn vertical_from_modal(&self, zt: f64, pzt: f64) -> (f64, f64) {
        (zt / self.vertical_scale, pzt * self.vertical_scale)
    }

    /// `max |CᵀJC - J|`.
    pub fn symplecticity_residual(&self) -> f64 {
        let ctjc = mat_mul(&mat_mul(&transpose(&self.c), &J4), &self.c);
        max_abs_diff(&ctjc, &J4)
    }

    /// `C M C⁻¹`.
    pub fn conjugated_matrix(&self) -> Mat4 {
        mat_mul(&mat_mul(&self.c, &self.linear.matrix()), &self.c_inv)
    }

    pub fn conjugation_residual(&self) -> f64 {
        max_abs_diff(&self.conjugated_matrix(), &self.linear.diagonal_matrix())
    }

    pub fn inverse_residual(&self) -> f64 {
        let mut id = [[0.0; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        max_abs_diff(&mat_mul(&self.c, &self.c_inv), &id)
    }

    /// Quadratic Hamiltonian in modal variables
    /// `(x̃, ỹ, z̃, p̃x, p̃y, p̃z)`.
    pub fn modal_hamiltonian(&self, m: [f64; 6]) -> f64 {
        let [x, y, z, px, py, pz] = m;
        self.linear.lambda_x * x * px
            + 0.5 * self.linear.omega_y * (y * y + py * py)
            + 0.5 * self.linear.omega_z * (z * z + pz * pz)
    }
}

/// `(ỹ, p̃y) -> (q, p)` with `ỹ = (q + i p)/√2`, `p̃y = (i q + p)/√2`.
pub fn complexify(y: Complex64, py: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let r = core::f64::consts::FRAC_1_SQRT_2;
    ((y - i * py) * r, (py - i * y) * r)
}

pub fn realify(q: Complex64, p: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let r = core::f64::consts::FRAC_1_SQRT_2;
    ((q + i * p) * r, (i * q + p) * r)
}

/// Flow of `H = i ω q p` over an anomaly interval `t`.
pub fn diagonal_flow(q: Complex64, p: Complex64, omega: f64, t: f64) -> (Complex64, Complex64) {
    let rot = Complex64::new(cos(omega * t), sin(omega * t));
    (q * rot, p * rot.conj())
}

/// Flow of the real modal system over `t`: hyperbolic in `(x̃, p̃x)`,
/// rotation in `(ỹ, p̃y)`.
pub fn modal_flow(linear: &LinearData, m: &[f64; 4], t: f64) -> [f64; 4] {
    let (l, w) = (linear.lambda_x, linear.omega_y);
    let (c, s) = (cos(w * t), sin(w * t));
    [
        m[0] * libm::exp(l * t),
        c * m[1] + s * m[3],
        m[2] * libm::exp(-l * t),
        -s * m[1] + c * m[3],
    ]
}
