//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerics.

#![allow(dead_code)]

pub const EM_MU: f64 = 0.012150586;

/// Euler quintics written out directly from their printed form.
pub fn quintic_direct(point: usize, mu: f64, g: f64) -> f64 {
    let g2 = g * g;
    let g3 = g2 * g;
    let g4 = g3 * g;
    let g5 = g4 * g;
    match point {
        1 => g5 - (3.0 - mu) * g4 + (3.0 - 2.0 * mu) * g3 - mu * g2 + 2.0 * mu * g - mu,
        2 => g5 + (3.0 - mu) * g4 + (3.0 - 2.0 * mu) * g3 - mu * g2 - 2.0 * mu * g - mu,
        _ => g5 + (2.0 + mu) * g4 + (1.0 + 2.0 * mu) * g3 - (1.0 - mu) * g2 - 2.0 * (1.0 - mu) * g - (1.0 - mu),
    }
}

/// Plain bisection with a fixed number of halvings.
pub fn bisection_gamma(point: usize, mu: f64) -> f64 {
    let (mut lo, mut hi) = if point == 3 { (1e-9, 2.5) } else { (1e-9, 0.99) };
    let f_lo = quintic_direct(point, mu, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = quintic_direct(point, mu, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Printed frequency series, evaluated in nested form in `e²`.
pub fn omega_y_printed(e: f64) -> f64 {
    let s = e * e;
    2.33439 + s * (0.356732 + s * (0.200957 + s * (0.139319 + s * 0.106541)))
}

pub fn omega_z_printed(e: f64) -> f64 {
    let s = e * e;
    2.26883 + s * (0.360261 + s * (0.201856 + s * (0.139720 + s * 0.106766)))
}

/// Planar circular problem with the primaries at `(mu, 0)` and `(mu-1, 0)`.
pub struct Cr3bp {
    pub mu: f64,
}

impl Cr3bp {
    fn potential_terms(&self, x: f64, y: f64) -> (f64, f64, f64, f64, f64) {
        let d1 = x - self.mu;
        let d2 = x - self.mu + 1.0;
        let r1 = (d1 * d1 + y * y).sqrt();
        let r2 = (d2 * d2 + y * y).sqrt();
        (d1, d2, r1, r2, 1.0 - self.mu)
    }

    /// `U = (x²+y²)/2 + (1-mu)/r1 + mu/r2 + mu(1-mu)/2`.
    pub fn u(&self, x: f64, y: f64) -> f64 {
        let (_, _, r1, r2, m1) = self.potential_terms(x, y);
        0.5 * (x * x + y * y) + m1 / r1 + self.mu / r2 + 0.5 * self.mu * m1
    }

    pub fn grad_u(&self, x: f64, y: f64) -> (f64, f64) {
        let (d1, d2, r1, r2, m1) = self.potential_terms(x, y);
        let k1 = m1 / r1.powi(3);
        let k2 = self.mu / r2.powi(3);
        (x - k1 * d1 - k2 * d2, y - k1 * y - k2 * y)
    }

    fn hessian_u(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (d1, d2, r1, r2, m1) = self.potential_terms(x, y);
        let (r1_3, r2_3) = (r1.powi(3), r2.powi(3));
        let (r1_5, r2_5) = (r1.powi(5), r2.powi(5));
        let uxx = 1.0 - m1 / r1_3 + 3.0 * m1 * d1 * d1 / r1_5 - self.mu / r2_3 + 3.0 * self.mu * d2 * d2 / r2_5;
        let uyy = 1.0 - m1 / r1_3 + 3.0 * m1 * y * y / r1_5 - self.mu / r2_3 + 3.0 * self.mu * y * y / r2_5;
        let uxy = 3.0 * m1 * d1 * y / r1_5 + 3.0 * self.mu * d2 * y / r2_5;
        (uxx, uxy, uyy)
    }

    /// State `(x, y, vx, vy)` followed by the row-major 4x4 STM.
    fn rhs(&self, s: &[f64; 20]) -> [f64; 20] {
        let (x, y, vx, vy) = (s[0], s[1], s[2], s[3]);
        let (ux, uy) = self.grad_u(x, y);
        let (uxx, uxy, uyy) = self.hessian_u(x, y);
        let a = [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [uxx, uxy, 0.0, 2.0],
            [uxy, uyy, -2.0, 0.0],
        ];
        let mut out = [0.0; 20];
        out[0] = vx;
        out[1] = vy;
        out[2] = 2.0 * vy + ux;
        out[3] = -2.0 * vx + uy;
        for i in 0..4 {
            for j in 0..4 {
                out[4 + 4 * i + j] = (0..4).map(|k| a[i][k] * s[4 + 4 * k + j]).sum();
            }
        }
        out
    }

    fn rk4(&self, s: &[f64; 20], h: f64) -> [f64; 20] {
        let add = |a: &[f64; 20], b: &[f64; 20], c: f64| {
            let mut o = *a;
            for i in 0..20 {
                o[i] += c * b[i];
            }
            o
        };
        let k1 = self.rhs(s);
        let k2 = self.rhs(&add(s, &k1, 0.5 * h));
        let k3 = self.rhs(&add(s, &k2, 0.5 * h));
        let k4 = self.rhs(&add(s, &k3, h));
        let mut o = *s;
        for i in 0..20 {
            o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        o
    }

    /// Velocity on the Jacobi level `C = 2U - v²` at `(x0, 0)`, signed.
    pub fn vy_on_level(&self, x0: f64, c: f64, sign: f64) -> f64 {
        sign * (2.0 * self.u(x0, 0.0) - c).sqrt()
    }

    /// Fixed-step RK4 propagation of state and STM to the first return to
    /// `y = 0`, i.e. the first crossing against the initial `vy` sign; the crossing is
    /// polished with secant iterations on a partial step.
    fn to_crossing(&self, x0: f64, vy0: f64, h: f64) -> ([f64; 20], f64) {
        let mut s = [0.0; 20];
        s[0] = x0;
        s[3] = vy0;
        for i in 0..4 {
            s[4 + 5 * i] = 1.0;
        }
        let mut t = 0.0;
        loop {
            let next = self.rk4(&s, h);
            t += h;
            if t > 5.0 * h && s[1] * vy0 > 0.0 && next[1] * vy0 <= 0.0 {
                let (mut a, mut b) = (0.0, h);
                let (mut ya, mut yb) = (s[1], next[1]);
                for _ in 0..60 {
                    let c = b - yb * (b - a) / (yb - ya);
                    let yc = self.rk4(&s, c)[1];
                    a = b;
                    ya = yb;
                    b = c;
                    yb = yc;
                    if yc.abs() < 1e-15 || (b - a).abs() < 1e-16 {
                        break;
                    }
                }
                return (self.rk4(&s, b), t - h + b);
            }
            s = next;
            assert!(t < 20.0, "no crossing found");
        }
    }

    /// Differential correction of `x0` on a fixed Jacobi level so that the
    /// orbit crosses `y = 0` perpendicularly. Returns `(x0, T/2)`.
    pub fn correct(&self, mut x0: f64, c: f64, sign: f64, h: f64) -> (f64, f64) {
        for _ in 0..30 {
            let vy0 = self.vy_on_level(x0, c, sign);
            let (s, t) = self.to_crossing(x0, vy0, h);
            let vx = s[2];
            if vx.abs() < 1e-13 {
                return (x0, t);
            }
            let (ux0, _) = self.grad_u(x0, 0.0);
            let dvy0 = ux0 / vy0;
            let d0 = [1.0, 0.0, 0.0, dvy0];
            let phi = |i: usize| (0..4).map(|k| s[4 + 4 * i + k] * d0[k]).sum::<f64>();
            let acc = self.rhs(&s);
            let dvx = phi(2) - acc[2] / s[3] * phi(1);
            let step = vx / dvx;
            x0 -= step;
            if step.abs() < 1e-15 {
                return (x0, t);
            }
        }
        panic!("circular-problem corrector did not converge");
    }
}
