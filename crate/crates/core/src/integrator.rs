//! One-step integration with HBVM(k,s).
//!
//! The default formulation iterates on the `s` Legendre coefficients
//! `γ_j ∈ R^{2m}` of the derivative of the collocation-like polynomial `σ`:
//!
//! ```text
//! γ_j ← Σ_ℓ ω_ℓ P_j(τ_ℓ) f(y₀ + h Σ_i (I_s)_ℓi γ_i),   j = 1..s
//! y₁  = y₀ + h γ_1
//! ```
//!
//! so the unknown count is `2m·s` however many silent stages `k − s` are
//! used. The stage-space formulation iterates on the `k` stage derivatives of
//! the equivalent Runge-Kutta method instead and is kept as a cross-check.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::problems::HamiltonianSystem;
use crate::tableau::HbvmTableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// `k · 2m` unknowns: the stage derivatives `f(y_i)`.
    StageSpace,
    /// `s · 2m` unknowns: the coefficients `γ_j`.
    #[default]
    GammaSpace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    /// Relative fixed-point tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub formulation: Formulation,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 100,
            formulation: Formulation::GammaSpace,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Domain("solver tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub y_next: Vec<f64>,
    pub iterations: usize,
    /// `γ_1..γ_s`.
    pub gamma: Vec<Vec<f64>>,
    /// `y_i = σ(t₀ + τ_i h)`, `i = 1..k`.
    pub stage_values: Vec<Vec<f64>>,
    pub converged: bool,
    /// Last fixed-point increment (max-norm).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub energies: Vec<f64>,
    /// `H(y_n) − H(y_0)`.
    pub energy_drift: Vec<f64>,
    /// Fixed-point iterations of each step; one entry fewer than `states`.
    pub iterations: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn max_abs_drift(&self) -> f64 {
        self.energy_drift.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    fn push<S: HamiltonianSystem + ?Sized>(&mut self, sys: &S, t: f64, y: Vec<f64>) {
        let e = sys.hamiltonian(&y);
        let e0 = self.energies.first().copied().unwrap_or(e);
        self.energies.push(e);
        self.energy_drift.push(e - e0);
        self.states.push(State { t, y });
    }
}

/// A failed integration: the steps that succeeded plus the error that
/// stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure {
    pub partial: Box<Trajectory>,
    /// Index of the step that failed (0-based).
    pub step: usize,
    pub error: Error,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} failed: {}", self.step, self.error)
    }
}

impl core::error::Error for IntegrationFailure {}

impl From<IntegrationFailure> for Error {
    fn from(f: IntegrationFailure) -> Self {
        f.error
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_inputs<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    h: f64,
    settings: &SolveSettings,
) -> Result<()> {
    settings.validate()?;
    let n = 2 * sys.dof();
    if y0.len() != n {
        return Err(Error::DimensionMismatch {
            op: "step",
            expected: (n, 1),
            found: (y0.len(), 1),
        });
    }
    if !h.is_finite() || h == 0.0 {
        return Err(Error::Domain("step size must be finite and nonzero".into()));
    }
    Ok(())
}

/// Advances `y0` by one step of size `h`.
///
/// Negative `h` steps backwards in time.
pub fn step<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tab: &HbvmTableau,
    y0: &[f64],
    h: f64,
    settings: &SolveSettings,
) -> Result<StepResult> {
    check_inputs(sys, y0, h, settings)?;
    match settings.formulation {
        Formulation::GammaSpace => step_gamma(sys, tab, y0, h, settings),
        Formulation::StageSpace => step_stages(sys, tab, y0, h, settings),
    }
}

/// `(P_sᵀ Ω)_jℓ = ω_ℓ P_j(τ_ℓ)`, row-major `s × k`.
fn projection_weights(tab: &HbvmTableau) -> Vec<f64> {
    let (k, s) = (tab.k(), tab.s());
    let mut w = vec![0.0; s * k];
    for j in 0..s {
        for l in 0..k {
            w[j * k + l] = tab.b()[l] * tab.ps()[(l, j)];
        }
    }
    w
}

/// `y0 + h Σ_i coeffs[i] · vecs[i]` into `out`.
fn combine(y0: &[f64], h: f64, coeffs: &[f64], vecs: &[f64], out: &mut [f64]) {
    let n = y0.len();
    out.copy_from_slice(y0);
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let hc = h * c;
        for (o, v) in out.iter_mut().zip(&vecs[i * n..(i + 1) * n]) {
            *o += hc * v;
        }
    }
}

fn split_rows(flat: &[f64], n: usize) -> Vec<Vec<f64>> {
    flat.chunks(n).map(<[f64]>::to_vec).collect()
}

fn step_gamma<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tab: &HbvmTableau,
    y0: &[f64],
    h: f64,
    settings: &SolveSettings,
) -> Result<StepResult> {
    let (k, s, n) = (tab.k(), tab.s(), y0.len());
    let w = projection_weights(tab);
    let is = tab.is();
    let mut gamma = vec![0.0; s * n];
    let mut next = vec![0.0; s * n];
    let mut stage = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iter {
        iterations += 1;
        next.iter_mut().for_each(|x| *x = 0.0);
        for l in 0..k {
            combine(y0, h, is.row(l), &gamma, &mut stage);
            sys.vector_field_into(&stage, &mut f);
            for j in 0..s {
                let wjl = w[j * k + l];
                for (g, fv) in next[j * n..(j + 1) * n].iter_mut().zip(&f) {
                    *g += wjl * fv;
                }
            }
        }
        residual = gamma
            .iter()
            .zip(&next)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        core::mem::swap(&mut gamma, &mut next);
        if !residual.is_finite() {
            break;
        }
        if residual <= settings.tol * (1.0 + max_abs(&gamma)) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SolverNoConvergence {
            iterations,
            residual,
        });
    }
    let y_next: Vec<f64> = y0.iter().zip(&gamma[..n]).map(|(y, g)| y + h * g).collect();
    let mut stage_values = Vec::with_capacity(k);
    for l in 0..k {
        combine(y0, h, is.row(l), &gamma, &mut stage);
        stage_values.push(stage.clone());
    }
    Ok(StepResult {
        y_next,
        iterations,
        gamma: split_rows(&gamma, n),
        stage_values,
        converged,
        residual,
    })
}

fn step_stages<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tab: &HbvmTableau,
    y0: &[f64],
    h: f64,
    settings: &SolveSettings,
) -> Result<StepResult> {
    let (k, s, n) = (tab.k(), tab.s(), y0.len());
    let a = tab.a();
    let mut derivs = vec![0.0; k * n];
    let mut next = vec![0.0; k * n];
    let mut stage = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iter {
        iterations += 1;
        for i in 0..k {
            combine(y0, h, a.row(i), &derivs, &mut stage);
            sys.vector_field_into(&stage, &mut next[i * n..(i + 1) * n]);
        }
        residual = derivs
            .iter()
            .zip(&next)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        core::mem::swap(&mut derivs, &mut next);
        if !residual.is_finite() {
            break;
        }
        if residual <= settings.tol * (1.0 + max_abs(&derivs)) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SolverNoConvergence {
            iterations,
            residual,
        });
    }
    let mut y_next = vec![0.0; n];
    combine(y0, h, tab.b(), &derivs, &mut y_next);
    let w = projection_weights(tab);
    let mut gamma = vec![vec![0.0; n]; s];
    for (j, g) in gamma.iter_mut().enumerate() {
        for l in 0..k {
            let wjl = w[j * k + l];
            for (gv, d) in g.iter_mut().zip(&derivs[l * n..(l + 1) * n]) {
                *gv += wjl * d;
            }
        }
    }
    let stage_values = (0..k)
        .map(|i| {
            combine(y0, h, a.row(i), &derivs, &mut stage);
            stage.clone()
        })
        .collect();
    Ok(StepResult {
        y_next,
        iterations,
        gamma,
        stage_values,
        converged,
        residual,
    })
}

/// `n_steps` consecutive steps of size `h` from `y0` at `t = 0`.
pub fn integrate<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tab: &HbvmTableau,
    y0: &[f64],
    h: f64,
    n_steps: usize,
    settings: &SolveSettings,
) -> core::result::Result<Trajectory, IntegrationFailure> {
    let mut traj = Trajectory::default();
    if let Err(error) = check_inputs(sys, y0, h, settings) {
        return Err(IntegrationFailure {
            partial: Box::new(traj),
            step: 0,
            error,
        });
    }
    traj.push(sys, 0.0, y0.to_vec());
    for n in 0..n_steps {
        let y = &traj.states[n].y;
        match step(sys, tab, y, h, settings) {
            Ok(r) => {
                traj.iterations.push(r.iterations);
                traj.push(sys, (n + 1) as f64 * h, r.y_next);
            }
            Err(error) => {
                return Err(IntegrationFailure {
                    partial: Box::new(traj),
                    step: n,
                    error,
                })
            }
        }
    }
    Ok(traj)
}

/// Errors below this are treated as round-off and left out of order fits.
pub const ROUND_OFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderPoint {
    pub h: f64,
    /// `‖y_N − y(T)‖∞`.
    pub error: f64,
    /// `log(e_{i−1}/e_i) / log(h_{i−1}/h_i)` against the previous point.
    pub observed_order: Option<f64>,
    /// Below [`ROUND_OFF_FLOOR`], not used in the fit.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub points: Vec<OrderPoint>,
    /// Least-squares slope of `log error` against `log h`.
    pub slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Global error at `t_end` for each step size, with the fitted order.
pub fn convergence_order<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tab: &HbvmTableau,
    y0: &[f64],
    h_list: &[f64],
    t_end: f64,
    settings: &SolveSettings,
) -> Result<OrderStudy> {
    if h_list.len() < 4 {
        return Err(Error::Domain(
            "an order study needs at least 4 step sizes".into(),
        ));
    }
    let exact = sys.exact_solution(t_end, y0).ok_or_else(|| {
        Error::Domain(alloc::format!(
            "{} has no exact solution for this state",
            sys.name()
        ))
    })?;
    let mut points: Vec<OrderPoint> = Vec::with_capacity(h_list.len());
    for &h in h_list {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::Domain("step sizes must be positive".into()));
        }
        let steps = libm::round(t_end / h);
        if steps < 1.0 || (steps * h - t_end).abs() > 1e-9 * t_end.abs().max(1.0) {
            return Err(Error::Domain(alloc::format!(
                "h = {h} does not divide T = {t_end}"
            )));
        }
        let traj = integrate(sys, tab, y0, h, steps as usize, settings)?;
        let y_end = &traj.last().expect("nonempty").y;
        let error = y_end
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let observed_order = points
            .last()
            .map(|p| libm::log(p.error / error) / libm::log(p.h / h));
        points.push(OrderPoint {
            h,
            error,
            observed_order,
            excluded: error.is_nan() || error < ROUND_OFF_FLOOR,
        });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| (libm::log(p.h), libm::log(p.error)))
        .unzip();
    if lx.len() < 2 {
        return Err(Error::DegenerateFit { usable: lx.len() });
    }
    Ok(OrderStudy {
        slope: fit_slope(&lx, &ly),
        points,
    })
}

/// Tolerance on `τ_i + τ_{k+1−i} = 1` for a rule to count as symmetric.
const SYMMETRY_NODE_TOL: f64 = 1e-14;

/// Steps forward by `h` and back by `−h`; returns `‖y_back − y0‖∞`.
pub fn symmetry_check<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    tab: &HbvmTableau,
    y0: &[f64],
    h: f64,
    settings: &SolveSettings,
) -> Result<f64> {
    let c = tab.c();
    let k = c.len();
    if (0..k).any(|i| (c[i] + c[k - 1 - i] - 1.0).abs() > SYMMETRY_NODE_TOL) {
        return Err(Error::Domain(
            "symmetry check needs nodes symmetric about 1/2".into(),
        ));
    }
    let fwd = step(sys, tab, y0, h, settings)?;
    let back = step(sys, tab, &fwd.y_next, -h, settings)?;
    Ok(back
        .y_next
        .iter()
        .zip(y0)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}
