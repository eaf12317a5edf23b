//! Canonical Hamiltonian systems `y' = J ∇H(y)`.
//!
//! States are ordered `(q_1..q_m, p_1..p_m)` and `J` is applied structurally:
//! `f(y) = (∂H/∂p, −∂H/∂q)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

pub trait HamiltonianSystem {
    fn name(&self) -> &str;

    /// Degrees of freedom `m`; states have length `2m`.
    fn dof(&self) -> usize;

    fn hamiltonian(&self, y: &[f64]) -> f64;

    /// Writes `∇H(y)` into `grad` (same ordering as `y`).
    fn gradient(&self, y: &[f64], grad: &mut [f64]);

    /// Total degree `ν` when `H` is a polynomial.
    fn poly_degree(&self) -> Option<u32> {
        None
    }

    /// `y(t)` from `y(0) = y0`, when known in closed form.
    fn exact_solution(&self, _t: f64, _y0: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `f(y) = J ∇H(y)` into `out`. Both slices have length `2m`.
    fn vector_field_into(&self, y: &[f64], out: &mut [f64]) {
        let m = self.dof();
        self.gradient(y, out);
        // (∇_q, ∇_p) -> (∇_p, −∇_q)
        for i in 0..m {
            let gq = out[i];
            out[i] = out[m + i];
            out[m + i] = -gq;
        }
    }
}

/// `J ∇H(y)` with a dimension check.
pub fn vector_field<S: HamiltonianSystem + ?Sized>(sys: &S, y: &[f64]) -> Result<Vec<f64>> {
    let n = 2 * sys.dof();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            op: "vector_field",
            expected: (n, 1),
            found: (y.len(), 1),
        });
    }
    let mut out = vec![0.0; n];
    sys.vector_field_into(y, &mut out);
    Ok(out)
}

/// The benchmark systems shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `H = (q² + p²)/2`
    Harmonic,
    /// `H = p²/2 + q⁴/4`
    QuarticOscillator,
    /// `H = p²/2 + q⁶/6`
    SexticOscillator,
    /// `H = p²/2 − cos q`
    Pendulum,
    /// `H = (p₁² + p₂²)/2 + (q₁² + q₂²)/2 + q₁²q₂ − q₂³/3`
    HenonHeiles,
    /// `H = |p|²/2 − 1/|q|` in the plane.
    Kepler,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Harmonic,
        Builtin::QuarticOscillator,
        Builtin::SexticOscillator,
        Builtin::Pendulum,
        Builtin::HenonHeiles,
        Builtin::Kepler,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Builtin::Harmonic => "harmonic",
            Builtin::QuarticOscillator => "quartic_oscillator",
            Builtin::SexticOscillator => "sextic_oscillator",
            Builtin::Pendulum => "pendulum",
            Builtin::HenonHeiles => "henon_heiles",
            Builtin::Kepler => "kepler",
        }
    }

    /// Initial state used by the command-line experiments.
    pub fn default_initial_state(self) -> Vec<f64> {
        match self {
            Builtin::Harmonic | Builtin::QuarticOscillator => vec![1.0, 0.0],
            // large enough that HBVM(5,2) visibly misses the degree-11 line integral at h = 0.1
            Builtin::SexticOscillator => vec![2.5, 0.0],
            Builtin::Pendulum => vec![1.5, 0.0],
            // energy 1/8, inside the bounded region
            Builtin::HenonHeiles => vec![0.0, 0.1, 0.49, 0.0],
            Builtin::Kepler => kepler_initial_state(0.3),
        }
    }
}

/// Periapsis state of the Kepler orbit with semi-major axis 1 and eccentricity `e`:
/// `q = (1 − e, 0)`, `p = (0, √((1+e)/(1−e)))`.
pub fn kepler_initial_state(e: f64) -> Vec<f64> {
    vec![1.0 - e, 0.0, 0.0, libm::sqrt((1.0 + e) / (1.0 - e))]
}

/// Looks up a builtin system by name.
pub fn builtin(name: &str) -> Result<Builtin> {
    name.parse()
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownProblem(s.into()))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl HamiltonianSystem for Builtin {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn dof(&self) -> usize {
        match self {
            Builtin::HenonHeiles | Builtin::Kepler => 2,
            _ => 1,
        }
    }

    fn hamiltonian(&self, y: &[f64]) -> f64 {
        match self {
            Builtin::Harmonic => 0.5 * (y[0] * y[0] + y[1] * y[1]),
            Builtin::QuarticOscillator => {
                let q2 = y[0] * y[0];
                0.5 * y[1] * y[1] + 0.25 * q2 * q2
            }
            Builtin::SexticOscillator => {
                let q2 = y[0] * y[0];
                0.5 * y[1] * y[1] + q2 * q2 * q2 / 6.0
            }
            Builtin::Pendulum => 0.5 * y[1] * y[1] - libm::cos(y[0]),
            Builtin::HenonHeiles => {
                let (q1, q2, p1, p2) = (y[0], y[1], y[2], y[3]);
                0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2
                    - q2 * q2 * q2 / 3.0
            }
            Builtin::Kepler => {
                let (q1, q2, p1, p2) = (y[0], y[1], y[2], y[3]);
                0.5 * (p1 * p1 + p2 * p2) - 1.0 / libm::hypot(q1, q2)
            }
        }
    }

    fn gradient(&self, y: &[f64], g: &mut [f64]) {
        match self {
            Builtin::Harmonic => {
                g[0] = y[0];
                g[1] = y[1];
            }
            Builtin::QuarticOscillator => {
                g[0] = y[0] * y[0] * y[0];
                g[1] = y[1];
            }
            Builtin::SexticOscillator => {
                let q2 = y[0] * y[0];
                g[0] = q2 * q2 * y[0];
                g[1] = y[1];
            }
            Builtin::Pendulum => {
                g[0] = libm::sin(y[0]);
                g[1] = y[1];
            }
            Builtin::HenonHeiles => {
                let (q1, q2) = (y[0], y[1]);
                g[0] = q1 + 2.0 * q1 * q2;
                g[1] = q2 + q1 * q1 - q2 * q2;
                g[2] = y[2];
                g[3] = y[3];
            }
            Builtin::Kepler => {
                let (q1, q2) = (y[0], y[1]);
                let r = libm::hypot(q1, q2);
                let r3 = r * r * r;
                g[0] = q1 / r3;
                g[1] = q2 / r3;
                g[2] = y[2];
                g[3] = y[3];
            }
        }
    }

    fn poly_degree(&self) -> Option<u32> {
        match self {
            Builtin::Harmonic => Some(2),
            Builtin::QuarticOscillator => Some(4),
            Builtin::SexticOscillator => Some(6),
            Builtin::HenonHeiles => Some(3),
            Builtin::Pendulum | Builtin::Kepler => None,
        }
    }

    fn exact_solution(&self, t: f64, y0: &[f64]) -> Option<Vec<f64>> {
        match self {
            Builtin::Harmonic => {
                let (s, c) = (libm::sin(t), libm::cos(t));
                Some(vec![c * y0[0] + s * y0[1], -s * y0[0] + c * y0[1]])
            }
            Builtin::Kepler => kepler_propagate(t, y0),
            _ => None,
        }
    }
}

/// Newton solve of Kepler's equation `E − e sin E = M`.
fn solve_kepler_equation(mean_anomaly: f64, e: f64) -> f64 {
    let mut ecc = if e > 0.8 {
        core::f64::consts::PI
    } else {
        mean_anomaly
    };
    for _ in 0..100 {
        let f = ecc - e * libm::sin(ecc) - mean_anomaly;
        let d = f / (1.0 - e * libm::cos(ecc));
        ecc -= d;
        if d.abs() <= 1e-14 * ecc.abs().max(1.0) {
            break;
        }
    }
    ecc
}

/// Two-body propagation (μ = 1) with Lagrange `f`/`g` coefficients.
/// Bound orbits only.
fn kepler_propagate(t: f64, y0: &[f64]) -> Option<Vec<f64>> {
    let (x0, z0, vx0, vz0) = (y0[0], y0[1], y0[2], y0[3]);
    let r0 = libm::hypot(x0, z0);
    let v2 = vx0 * vx0 + vz0 * vz0;
    let inv_a = 2.0 / r0 - v2;
    if r0 == 0.0 || inv_a <= 0.0 {
        return None;
    }
    let a = 1.0 / inv_a;
    let sqrt_a = libm::sqrt(a);
    let n = 1.0 / (a * sqrt_a);
    let rv = x0 * vx0 + z0 * vz0;
    let e_cos = 1.0 - r0 / a;
    let e_sin = rv / sqrt_a;
    let e = libm::hypot(e_cos, e_sin);
    let e0 = libm::atan2(e_sin, e_cos);
    let m0 = e0 - e_sin;
    let ecc = solve_kepler_equation(m0 + n * t, e);
    let de = ecc - e0;
    let (sde, cde) = (libm::sin(de), libm::cos(de));
    let r = a * (1.0 - e * libm::cos(ecc));
    let f = 1.0 - a / r0 * (1.0 - cde);
    let g = t - (de - sde) / n;
    let fdot = -sqrt_a * sde / (r * r0);
    let gdot = 1.0 - a / r * (1.0 - cde);
    Some(vec![
        f * x0 + g * vx0,
        f * z0 + g * vz0,
        fdot * x0 + gdot * vx0,
        fdot * z0 + gdot * vz0,
    ])
}
