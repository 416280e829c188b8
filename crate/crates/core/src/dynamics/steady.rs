use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, Rk4};
use super::STEPS_PER_PERIOD;
use crate::error::{Error, Result};
use crate::qcore::{c, DrivenHamiltonian, Operator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SteadyMethod {
    LongTime,
    Nullspace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    /// Singular values below `degeneracy * sigma_max` count as zero.
    pub degeneracy: f64,
    /// Long-time stopping rule on `||d rho/dt||_1`, 1/us.
    pub rate_tolerance: f64,
    /// Upper bound on propagator squarings.
    pub max_doublings: usize,
    pub steps_per_period: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            degeneracy: 1e-10,
            rate_tolerance: 1e-10,
            max_doublings: 64,
            steps_per_period: STEPS_PER_PERIOD,
        }
    }
}

/// Superoperator of a static generator acting on row-major vectorized
/// density matrices.
pub fn liouvillian(h: &Operator, lindblads: &[Operator]) -> DMatrix<C64> {
    let kernel = Kernel::new(&DrivenHamiltonian::new(h.clone()), lindblads);
    let d = h.dim();
    let n = d * d;
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![c(0.0, 0.0); n];
    let mut out = vec![c(0.0, 0.0); n];
    let mut buf = Vec::new();
    for col in 0..n {
        e[col] = c(1.0, 0.0);
        kernel.rho_rhs(0.0, &e, &mut out, &mut buf);
        for row in 0..n {
            m[(row, col)] = out[row];
        }
        e[col] = c(0.0, 0.0);
    }
    m
}

fn to_density(h: &Operator, v: &[C64]) -> Result<Operator> {
    let d = h.dim();
    let tr: C64 = (0..d).map(|i| v[i * d + i]).sum();
    if tr.norm() < 1e-300 {
        return Err(Error::NotConverged("steady vector has zero trace".into()));
    }
    let rho = Operator::from_fn(h.basis(), |i, j| v[i * d + j] / tr);
    Ok((&rho + &rho.dagger()).scale_re(0.5))
}

/// Trace norm of `L(rho)` for a static generator.
pub fn steady_residual(h: &Operator, lindblads: &[Operator], rho: &Operator) -> f64 {
    let kernel = Kernel::new(&DrivenHamiltonian::new(h.clone()), lindblads);
    let y = rho.flatten();
    let mut out = vec![c(0.0, 0.0); y.len()];
    kernel.rho_rhs(0.0, &y, &mut out, &mut Vec::new());
    let d = h.dim();
    let r = Operator::from_fn(h.basis(), |i, j| out[i * d + j]);
    let r = (&r + &r.dagger()).scale_re(0.5);
    r.eigenvalues_hermitian().iter().map(|x| x.abs()).sum()
}

/// Stationary state of a time-independent Lindblad generator.
pub fn steady_state(
    h: &Operator,
    lindblads: &[Operator],
    method: SteadyMethod,
) -> Result<Operator> {
    steady_state_with(h, lindblads, method, &SteadyOptions::default())
}

pub fn steady_state_with(
    h: &Operator,
    lindblads: &[Operator],
    method: SteadyMethod,
    opts: &SteadyOptions,
) -> Result<Operator> {
    match method {
        SteadyMethod::Nullspace => nullspace(h, lindblads, opts),
        SteadyMethod::LongTime => long_time_static(h, lindblads, opts),
    }
}

fn nullspace(h: &Operator, lindblads: &[Operator], opts: &SteadyOptions) -> Result<Operator> {
    null_vector(h, liouvillian(h, lindblads), opts)
}

// Applies one RK4 step (or a sequence of steps) to every basis matrix,
// giving the propagator as a superoperator.
fn propagator(kernel: &Kernel, t0: f64, dt: f64, steps: usize) -> DMatrix<C64> {
    let n = kernel.dim * kernel.dim;
    let mut p = DMatrix::zeros(n, n);
    let mut rk = Rk4::new(n);
    let mut y = vec![c(0.0, 0.0); n];
    for col in 0..n {
        y.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        y[col] = c(1.0, 0.0);
        for s in 0..steps {
            rk.step(
                |t, y, o, b| kernel.rho_rhs(t, y, o, b),
                t0 + s as f64 * dt,
                dt,
                &mut y,
            );
        }
        for row in 0..n {
            p[(row, col)] = y[row];
        }
    }
    p
}

fn mixed_start(d: usize) -> DVector<C64> {
    DVector::from_fn(d * d, |k, _| {
        if k / d == k % d {
            c(1.0 / d as f64, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn long_time_static(
    h: &Operator,
    lindblads: &[Operator],
    opts: &SteadyOptions,
) -> Result<Operator> {
    let driven = DrivenHamiltonian::new(h.clone());
    let kernel = Kernel::new(&driven, lindblads);
    let w = driven.max_frequency() + kernel.max_jump_rate();
    let dt = if w > 0.0 {
        2.0 * PI / w / opts.steps_per_period
    } else {
        1.0
    };
    let mut p = propagator(&kernel, 0.0, dt, 1);
    let d = h.dim();
    let start = mixed_start(d);
    for k in 0..opts.max_doublings {
        let v = &p * &start;
        let rho = to_density(h, v.as_slice())?;
        let res = steady_residual(h, lindblads, &rho);
        log::debug!(
            "long-time doubling {k}: t = {:.3e} us, residual {res:.3e}",
            dt * 2f64.powi(k as i32)
        );
        if res < opts.rate_tolerance {
            return Ok(rho);
        }
        p = &p * &p;
    }
    Err(Error::NotConverged(format!(
        "|d rho/dt| above {:e} after {} doublings",
        opts.rate_tolerance, opts.max_doublings
    )))
}

/// Stroboscopic steady state of a drive periodic in `period`: the fixed
/// point of the one-period propagator `P`, taken from the null vector of `P - 1`.
pub fn periodic_steady_state(
    driven: &DrivenHamiltonian,
    lindblads: &[Operator],
    period: f64,
    opts: &SteadyOptions,
) -> Result<Operator> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive period must be positive, got {period}"
        )));
    }
    let kernel = Kernel::new(driven, lindblads);
    let w = driven.max_frequency() + kernel.max_jump_rate();
    let steps = ((period * w / (2.0 * PI)) * opts.steps_per_period)
        .ceil()
        .max(1.0) as usize;
    let mut m = super::period_propagator(driven, lindblads, 0.0, period / steps as f64, steps);
    let n = m.nrows();
    for k in 0..n {
        m[(k, k)] -= c(1.0, 0.0);
    }
    null_vector(&driven.static_part, m, opts)
}

fn null_vector(h: &Operator, m: DMatrix<C64>, opts: &SteadyOptions) -> Result<Operator> {
    let svd = m.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let zeros = sv.iter().filter(|&&s| s <= opts.degeneracy * smax).count();
    if zeros > 1 {
        return Err(Error::DegenerateSteadyState(zeros));
    }
    let k = sv.imin();
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let v: Vec<C64> = vt.row(k).iter().map(|z| z.conj()).collect();
    to_density(h, &v)
}
