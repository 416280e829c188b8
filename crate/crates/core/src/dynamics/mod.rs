//! Fixed-step propagation of kets and density matrices, and steady states.

mod kernel;
mod steady;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{c, hermitize_check, Basis, DrivenHamiltonian, Ket, Operator, C64};
use kernel::{Kernel, Rk4};

pub use steady::{
    liouvillian, periodic_steady_state, steady_residual, steady_state, steady_state_with,
    SteadyMethod, SteadyOptions,
};

/// Default number of steps per period of the fastest frequency.
pub const STEPS_PER_PERIOD: f64 = 40.0;
/// Coarsest allowed resolution of the fastest frequency.
pub const MIN_STEPS_PER_PERIOD: f64 = 20.0;

/// Fixed-step time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub sample_stride: usize,
}

impl TimeGrid {
    /// Grid with the requested step, rejected if it under-resolves `omega_max`.
    pub fn new(t0: f64, t1: f64, dt: f64, sample_stride: usize, omega_max: f64) -> Result<Self> {
        if !(t1 >= t0) || !(dt > 0.0) || sample_stride == 0 {
            return Err(Error::InvalidParameter(format!(
                "bad time grid [{t0}, {t1}] dt = {dt}"
            )));
        }
        let max = Self::max_step(omega_max);
        if dt > max * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, max });
        }
        // snap so the last step lands on t1
        let n = Self::count(t1 - t0, dt);
        let dt = if n == 0 { dt } else { (t1 - t0) / n as f64 };
        Ok(TimeGrid {
            t0,
            t1,
            dt,
            sample_stride,
        })
    }

    /// Grid with `steps_per_period` steps per period of `omega_max`.
    pub fn resolved(
        t0: f64,
        t1: f64,
        omega_max: f64,
        steps_per_period: f64,
        sample_stride: usize,
    ) -> Result<Self> {
        if steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::InvalidParameter(format!(
                "at least {MIN_STEPS_PER_PERIOD} steps per period required"
            )));
        }
        let target = 2.0 * PI / omega_max.max(1e-300) / steps_per_period;
        let n = ((t1 - t0) / target).ceil().max(1.0);
        TimeGrid::new(t0, t1, (t1 - t0) / n, sample_stride, omega_max)
    }

    pub fn for_hamiltonian(
        t0: f64,
        t1: f64,
        h: &DrivenHamiltonian,
        sample_stride: usize,
    ) -> Result<Self> {
        Self::resolved(t0, t1, h.max_frequency(), STEPS_PER_PERIOD, sample_stride)
    }

    pub fn max_step(omega_max: f64) -> f64 {
        if omega_max > 0.0 {
            2.0 * PI / omega_max / MIN_STEPS_PER_PERIOD
        } else {
            f64::INFINITY
        }
    }

    fn count(span: f64, dt: f64) -> usize {
        if span <= 0.0 {
            0
        } else {
            ((span / dt) - 1e-9).ceil().max(1.0) as usize
        }
    }

    pub fn steps(&self) -> usize {
        Self::count(self.t1 - self.t0, self.dt)
    }

    /// Same span with the step halved.
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            dt: self.dt / 2.0,
            sample_stride: self.sample_stride * 2,
            ..*self
        }
    }
}

/// Invariant thresholds checked at every sample of a density-matrix run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityLimits {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub norm: f64,
}

impl Default for PhysicalityLimits {
    fn default() -> Self {
        PhysicalityLimits {
            trace: 1e-8,
            hermiticity: 1e-10,
            min_eigenvalue: -1e-9,
            norm: 1e-8,
        }
    }
}

/// Worst values of the invariants seen over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl Default for PhysicalityReport {
    fn default() -> Self {
        PhysicalityReport {
            max_trace_drift: 0.0,
            max_hermiticity: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl PhysicalityReport {
    pub fn merge(&mut self, other: &PhysicalityReport) {
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity = self.max_hermiticity.max(other.max_hermiticity);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }

    pub fn within(&self, lim: &PhysicalityLimits) -> bool {
        self.max_trace_drift < lim.trace
            && self.max_hermiticity < lim.hermiticity
            && self.min_eigenvalue > lim.min_eigenvalue
    }
}

#[derive(Debug, Clone)]
pub enum States {
    Kets(Vec<Ket>),
    Densities(Vec<Operator>),
}

/// Sampled evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: States,
    /// Named population series, one value per sample.
    pub observables: BTreeMap<String, Vec<f64>>,
    pub physicality: PhysicalityReport,
}

impl Trajectory {
    pub fn basis(&self) -> &Arc<Basis> {
        match &self.states {
            States::Kets(k) => k[0].basis(),
            States::Densities(r) => r[0].basis(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_density(&self) -> Operator {
        match &self.states {
            States::Kets(k) => Operator::projector(k.last().unwrap()),
            States::Densities(r) => r.last().unwrap().clone(),
        }
    }

    /// `<k|rho|k>` at each sample.
    pub fn population_of(&self, k: &Ket) -> Result<Vec<f64>> {
        match &self.states {
            States::Kets(v) => v.iter().map(|s| Ok(k.inner(s)?.norm_sqr())).collect(),
            States::Densities(v) => v.iter().map(|r| Ok(r.element(k, k)?.re)).collect(),
        }
    }

    /// Summed population of a set of basis indices at each sample.
    pub fn population_sum(&self, idx: &[usize]) -> Vec<f64> {
        match &self.states {
            States::Kets(v) => v
                .iter()
                .map(|s| idx.iter().map(|&i| s.amplitudes()[i].norm_sqr()).sum())
                .collect(),
            States::Densities(v) => v
                .iter()
                .map(|r| idx.iter().map(|&i| r[(i, i)].re).sum())
                .collect(),
        }
    }

    pub fn add_observable(&mut self, name: &str, series: Vec<f64>) {
        self.observables.insert(name.to_string(), series);
    }

    /// Records the population of every basis state under its label.
    pub fn add_basis_populations(&mut self) {
        let b = self.basis().clone();
        for i in 0..b.dim() {
            let s = self.population_sum(&[i]);
            self.add_observable(&format!("P_{}", b.label(i)), s);
        }
    }

    /// Appends `other`, dropping its first sample when it repeats the last time.
    pub fn append(&mut self, other: Trajectory) {
        let skip = usize::from(self.times.last() == other.times.first());
        self.times.extend(other.times.into_iter().skip(skip));
        match (&mut self.states, other.states) {
            (States::Kets(a), States::Kets(b)) => a.extend(b.into_iter().skip(skip)),
            (States::Densities(a), States::Densities(b)) => a.extend(b.into_iter().skip(skip)),
            _ => panic!("cannot append trajectories of different state kinds"),
        }
        for (k, v) in other.observables {
            self.observables
                .entry(k)
                .or_default()
                .extend(v.into_iter().skip(skip));
        }
        self.physicality.merge(&other.physicality);
    }
}

fn check_grid(h: &DrivenHamiltonian, grid: &TimeGrid) -> Result<()> {
    let max = TimeGrid::max_step(h.max_frequency());
    if grid.dt > max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt: grid.dt, max });
    }
    Ok(())
}

/// Schrodinger evolution `d psi/dt = -i H psi` with classical RK4.
pub fn evolve_unitary(h: &DrivenHamiltonian, psi0: &Ket, grid: &TimeGrid) -> Result<Trajectory> {
    evolve_unitary_with(h, psi0, grid, &PhysicalityLimits::default())
}

pub fn evolve_unitary_with(
    h: &DrivenHamiltonian,
    psi0: &Ket,
    grid: &TimeGrid,
    lim: &PhysicalityLimits,
) -> Result<Trajectory> {
    check_grid(h, grid)?;
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: psi0.dim(),
        });
    }
    if (psi0.norm_sqr() - 1.0).abs() > lim.norm {
        return Err(Error::InvalidParameter(
            "initial ket is not normalized".into(),
        ));
    }
    let frame = Frame::new(&h.static_part);
    let kernel = Kernel::new(&frame.strip(h), &[]);
    let basis = psi0.basis().clone();
    let d = h.dim();
    let mut y: Vec<C64> = (frame.u.adjoint() * psi0.amplitudes())
        .iter()
        .copied()
        .collect();
    frame.phase_ket(grid.t0, &mut y, 1.0);
    let scratch = RefCell::new((vec![c(0.0, 0.0); d], vec![c(0.0, 0.0); d]));
    let rhs = |t: f64, y: &[C64], out: &mut [C64], buf: &mut Vec<(usize, usize, C64)>| {
        let (tmp, ph) = &mut *scratch.borrow_mut();
        frame.phases(t, ph);
        for j in 0..d {
            tmp[j] = y[j] * ph[j].conj();
        }
        kernel.ket_rhs(t, tmp, out, buf);
        for j in 0..d {
            out[j] *= ph[j];
        }
    };
    let mut rk = Rk4::new(y.len());
    let n = grid.steps();
    let mut times = vec![grid.t0];
    let mut states = vec![psi0.clone()];
    let mut drift: f64 = 0.0;
    for s in 0..n {
        let t = grid.t0 + s as f64 * grid.dt;
        rk.step(rhs, t, grid.dt, &mut y);
        if (s + 1) % grid.sample_stride == 0 || s + 1 == n {
            let tt = grid.t0 + (s + 1) as f64 * grid.dt;
            let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
            drift = drift.max((norm - 1.0).abs());
            if (norm - 1.0).abs() > lim.norm {
                return Err(Error::Physicality {
                    t: tt,
                    what: format!("norm drift {:.3e}", norm - 1.0),
                });
            }
            let mut v = y.clone();
            frame.phase_ket(tt, &mut v, -1.0);
            let v = &frame.u * DVector::from_vec(v);
            times.push(tt);
            states.push(Ket::from_amplitudes(&basis, v.iter().copied().collect())?);
        }
    }
    let physicality = PhysicalityReport {
        max_trace_drift: drift,
        max_hermiticity: 0.0,
        min_eigenvalue: 0.0,
    };
    Ok(Trajectory {
        times,
        states: States::Kets(states),
        observables: BTreeMap::new(),
        physicality,
    })
}

/// Lindblad master equation
/// `d rho/dt = -i [H, rho] + sum_k (L rho L^dag - {L^dag L, rho} / 2)` with RK4.
pub fn evolve_master(
    h: &DrivenHamiltonian,
    lindblads: &[Operator],
    rho0: &Operator,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    evolve_master_with(h, lindblads, rho0, grid, &PhysicalityLimits::default())
}

pub fn evolve_master_with(
    h: &DrivenHamiltonian,
    lindblads: &[Operator],
    rho0: &Operator,
    grid: &TimeGrid,
    lim: &PhysicalityLimits,
) -> Result<Trajectory> {
    check_grid(h, grid)?;
    let d = h.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: rho0.dim(),
        });
    }
    for l in lindblads {
        if l.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: l.dim(),
            });
        }
    }
    let mut report = PhysicalityReport::default();
    check_density(rho0, grid.t0, lim, &mut report)?;
    let stepper = MasterStepper::new(h, lindblads);
    let basis = rho0.basis().clone();
    let mut y = stepper.load(rho0, grid.t0);
    let n = grid.steps();
    let mut times = vec![grid.t0];
    let mut states = vec![rho0.clone()];
    let mut s = 0;
    while s < n {
        let chunk = grid.sample_stride.min(n - s);
        stepper.advance(&mut y, grid.t0 + s as f64 * grid.dt, grid.dt, chunk);
        s += chunk;
        let tt = grid.t0 + s as f64 * grid.dt;
        let rho = stepper.unload(&y, tt, &basis);
        check_density(&rho, tt, lim, &mut report)?;
        times.push(tt);
        states.push(rho);
    }
    Ok(Trajectory {
        times,
        states: States::Densities(states),
        observables: BTreeMap::new(),
        physicality: report,
    })
}

/// Master-equation run for a drive periodic in `period`. The one-period
/// propagator is built with the grid's step and applied repeatedly, then
/// the remainder is integrated directly. Samples fall on period boundaries.
/// Short runs, where building the propagator costs more than stepping,
/// fall back to [`evolve_master_with`].
pub fn evolve_master_periodic(
    h: &DrivenHamiltonian,
    lindblads: &[Operator],
    rho0: &Operator,
    grid: &TimeGrid,
    period: f64,
    lim: &PhysicalityLimits,
) -> Result<Trajectory> {
    check_grid(h, grid)?;
    if !(period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive period must be positive, got {period}"
        )));
    }
    let d = h.dim();
    let periods = (((grid.t1 - grid.t0) / period) + 1e-9).floor() as usize;
    if periods < 2 * d * d || rho0.dim() != d {
        return evolve_master_with(h, lindblads, rho0, grid, lim);
    }
    let per_period = ((period / grid.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = period / per_period as f64;
    let basis = rho0.basis().clone();
    let n2 = d * d;
    let prop = period_propagator(h, lindblads, grid.t0, dt, per_period);

    let mut report = PhysicalityReport::default();
    check_density(rho0, grid.t0, lim, &mut report)?;
    let samples = grid.steps().div_ceil(grid.sample_stride).max(1);
    let every = periods.div_ceil(samples).max(1);
    let mut v = DVector::from_vec(rho0.flatten());
    let mut next = DVector::zeros(n2);
    let mut times = vec![grid.t0];
    let mut states = vec![rho0.clone()];
    for k in 1..=periods {
        prop.mul_to(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
        if k % every == 0 || k == periods {
            let tt = grid.t0 + k as f64 * period;
            let rho = Operator::from_fn(&basis, |i, j| v[i * d + j]);
            check_density(&rho, tt, lim, &mut report)?;
            times.push(tt);
            states.push(rho);
        }
    }
    let mut tr = Trajectory {
        times,
        states: States::Densities(states),
        observables: BTreeMap::new(),
        physicality: report,
    };
    let t_rest = grid.t0 + periods as f64 * period;
    if grid.t1 - t_rest > 1e-12 * period {
        let last = tr.final_density();
        let rest = TimeGrid::new(t_rest, grid.t1, grid.dt, usize::MAX, h.max_frequency())?;
        tr.append(evolve_master_with(h, lindblads, &last, &rest, lim)?);
    }
    Ok(tr)
}

// RK4 propagation in the static eigenframe. Buffers hold the frame
// representation; `load` and `unload` convert at a given time.
// Superoperator over `[t0, t0 + steps dt]` on row-major vectorized densities.
pub(crate) fn period_propagator(
    h: &DrivenHamiltonian,
    lindblads: &[Operator],
    t0: f64,
    dt: f64,
    steps: usize,
) -> DMatrix<C64> {
    let d = h.dim();
    let stepper = MasterStepper::new(h, lindblads);
    let basis = h.static_part.basis().clone();
    let mut prop = DMatrix::<C64>::zeros(d * d, d * d);
    let mut unit = Operator::zeros(&basis);
    for col in 0..d * d {
        let (a, b) = (col / d, col % d);
        unit[(a, b)] = c(1.0, 0.0);
        let mut y = stepper.load(&unit, t0);
        unit[(a, b)] = c(0.0, 0.0);
        stepper.advance(&mut y, t0, dt, steps);
        let out = stepper.unload(&y, t0 + dt * steps as f64, &basis).flatten();
        prop.column_mut(col).copy_from_slice(&out);
    }
    prop
}

struct MasterStepper {
    frame: Frame,
    kernel: Kernel,
    d: usize,
    scratch: RefCell<(Vec<C64>, Vec<C64>)>,
    rk: RefCell<Rk4>,
}

impl MasterStepper {
    fn new(h: &DrivenHamiltonian, lindblads: &[Operator]) -> Self {
        let d = h.dim();
        let frame = Frame::new(&h.static_part);
        let stripped: Vec<Operator> = lindblads.iter().map(|l| frame.to_eigen(l)).collect();
        let kernel = Kernel::new(&frame.strip(h), &stripped);
        MasterStepper {
            frame,
            kernel,
            d,
            scratch: RefCell::new((vec![c(0.0, 0.0); d * d], vec![c(0.0, 0.0); d])),
            rk: RefCell::new(Rk4::new(d * d)),
        }
    }

    fn load(&self, rho: &Operator, t: f64) -> Vec<C64> {
        let mut y = self.frame.to_eigen(rho).flatten();
        self.frame.phase_rho(t, &mut y, 1.0);
        y
    }

    fn unload(&self, y: &[C64], t: f64, basis: &Arc<Basis>) -> Operator {
        let d = self.d;
        let mut v = y.to_vec();
        self.frame.phase_rho(t, &mut v, -1.0);
        self.frame
            .from_eigen(&Operator::from_fn(basis, |i, j| v[i * d + j]))
    }

    fn advance(&self, y: &mut [C64], t0: f64, dt: f64, steps: usize) {
        let d = self.d;
        let rhs = |t: f64, y: &[C64], out: &mut [C64], buf: &mut Vec<(usize, usize, C64)>| {
            let (tmp, ph) = &mut *self.scratch.borrow_mut();
            self.frame.phases(t, ph);
            for j in 0..d {
                for k in 0..d {
                    tmp[j * d + k] = y[j * d + k] * ph[j].conj() * ph[k];
                }
            }
            self.kernel.rho_rhs(t, tmp, out, buf);
            for j in 0..d {
                for k in 0..d {
                    out[j * d + k] *= ph[j] * ph[k].conj();
                }
            }
        };
        let mut rk = self.rk.borrow_mut();
        for s in 0..steps {
            rk.step(rhs, t0 + s as f64 * dt, dt, y);
        }
    }
}

// Eigenframe of the static Hamiltonian `H0`. States are carried as
// `e^{i H0 t} rho e^{-i H0 t}` in its eigenbasis, so the static phases are
// exact and RK4 only resolves the drive and decay.
struct Frame {
    u: DMatrix<C64>,
    e: Vec<f64>,
}

impl Frame {
    fn new(h0: &Operator) -> Self {
        let d = h0.dim();
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || h0[(i, j)] == c(0.0, 0.0)));
        if diagonal {
            return Frame {
                u: DMatrix::identity(d, d),
                e: (0..d).map(|i| h0[(i, i)].re).collect(),
            };
        }
        let eig = h0.matrix().clone().symmetric_eigen();
        Frame {
            u: eig.eigenvectors,
            e: eig.eigenvalues.iter().copied().collect(),
        }
    }

    // Rounding residue below 1e-14 of the largest entry is dropped to keep
    // the kernel sparse.
    fn to_eigen(&self, a: &Operator) -> Operator {
        let mut m = a.conjugate_by(&self.u);
        let tol = 1e-14 * m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        m.iter_mut()
            .filter(|z| z.norm() < tol)
            .for_each(|z| *z = c(0.0, 0.0));
        Operator::from_matrix(a.basis(), m).expect("same dimension")
    }

    fn from_eigen(&self, a: &Operator) -> Operator {
        Operator::from_matrix(a.basis(), &self.u * a.matrix() * self.u.adjoint())
            .expect("same dimension")
    }

    // Drive terms in the eigenbasis, static part removed.
    fn strip(&self, h: &DrivenHamiltonian) -> DrivenHamiltonian {
        let mut out = h.clone();
        out.static_part = Operator::zeros(h.basis());
        for term in &mut out.terms {
            term.op = self.to_eigen(&term.op);
        }
        out
    }

    fn phases(&self, t: f64, out: &mut [C64]) {
        for (p, e) in out.iter_mut().zip(&self.e) {
            *p = C64::from_polar(1.0, e * t);
        }
    }

    fn phase_ket(&self, t: f64, y: &mut [C64], sign: f64) {
        for (z, e) in y.iter_mut().zip(&self.e) {
            *z *= C64::from_polar(1.0, sign * e * t);
        }
    }

    fn phase_rho(&self, t: f64, y: &mut [C64], sign: f64) {
        let d = self.e.len();
        for j in 0..d {
            for k in 0..d {
                y[j * d + k] *= C64::from_polar(1.0, sign * (self.e[j] - self.e[k]) * t);
            }
        }
    }
}

/// Validates trace, Hermiticity and positivity, folding the values into `report`.
pub fn check_density(
    rho: &Operator,
    t: f64,
    lim: &PhysicalityLimits,
    report: &mut PhysicalityReport,
) -> Result<()> {
    let tr = rho.trace();
    let drift = (tr - c(1.0, 0.0)).norm();
    let herm = hermitize_check(rho);
    let lmin = rho.eigenvalues_hermitian()[0];
    report.max_trace_drift = report.max_trace_drift.max(drift);
    report.max_hermiticity = report.max_hermiticity.max(herm);
    report.min_eigenvalue = report.min_eigenvalue.min(lmin);
    if drift > lim.trace {
        return Err(Error::Physicality {
            t,
            what: format!("trace drift {drift:.3e}"),
        });
    }
    if herm > lim.hermiticity {
        return Err(Error::Physicality {
            t,
            what: format!("Hermiticity deviation {herm:.3e}"),
        });
    }
    if lmin < lim.min_eigenvalue {
        return Err(Error::Physicality {
            t,
            what: format!("negative eigenvalue {lmin:.3e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Tone;

    fn qubit() -> Arc<Basis> {
        Arc::new(Basis::single(&["g", "e"]).unwrap())
    }

    #[test]
    fn step_bound_enforced() {
        assert!(matches!(
            TimeGrid::new(0.0, 1.0, 0.1, 1, 10.0),
            Err(Error::StepTooLarge { .. })
        ));
        let g = TimeGrid::new(0.0, 1.0, 0.03, 1, 10.0).unwrap();
        assert!((g.dt * g.steps() as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let b = qubit();
        let h = DrivenHamiltonian::new(Operator::zeros(&b));
        let psi = Ket::superposition(&b, &[(c(1.0, 0.0), &["g"]), (c(0.0, 1.0), &["e"])]).unwrap();
        let tr =
            evolve_unitary(&h, &psi, &TimeGrid::new(0.0, 1.0, 0.01, 10, 0.0).unwrap()).unwrap();
        if let States::Kets(k) = &tr.states {
            assert_eq!(k.last().unwrap(), &psi);
        }
    }

    #[test]
    fn rabi_formula() {
        let b = qubit();
        let w = 2.0;
        let sx = Operator::from_fn(
            &b,
            |i, j| if i != j { c(w / 2.0, 0.0) } else { c(0.0, 0.0) },
        );
        let h = DrivenHamiltonian::new(sx);
        let g = Ket::basis_state(&b, &["g"]).unwrap();
        let grid = TimeGrid::resolved(0.0, 5.0, h.max_frequency(), 400.0, 5).unwrap();
        let tr = evolve_unitary(&h, &g, &grid).unwrap();
        let e = Ket::basis_state(&b, &["e"]).unwrap();
        for (t, p) in tr.times.iter().zip(tr.population_of(&e).unwrap()) {
            assert!((p - (w * t / 2.0).sin().powi(2)).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn exponential_decay() {
        let b = qubit();
        let gamma = 0.7;
        let l = Operator::transition(&b, &["g"], &["e"])
            .unwrap()
            .scale_re((gamma / 2.0f64).sqrt());
        let h = DrivenHamiltonian::new(Operator::zeros(&b));
        let rho0 = Operator::projector(&Ket::basis_state(&b, &["e"]).unwrap());
        let grid = TimeGrid::new(0.0, 3.0, 0.002, 50, 0.0).unwrap();
        let tr = evolve_master(&h, &[l.clone(), l], &rho0, &grid).unwrap();
        let pe = tr.population_sum(&[1]);
        for (t, p) in tr.times.iter().zip(pe) {
            assert!((p - (-gamma * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn closed_master_matches_unitary() {
        let b = Arc::new(Basis::single(&["a", "b", "c"]).unwrap());
        let st = Operator::from_fn(&b, |i, j| {
            if i == j {
                c(0.3 * i as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let a = Operator::from_fn(
            &b,
            |i, j| if i + 1 == j { c(1.0, 0.2) } else { c(0.0, 0.0) },
        );
        let h = DrivenHamiltonian::new(st)
            .with_term(
                a,
                vec![
                    Tone {
                        amplitude: c(0.4, 0.0),
                        freq: 1.3,
                    },
                    Tone {
                        amplitude: c(0.4, 0.0),
                        freq: -1.3,
                    },
                ],
            )
            .unwrap();
        let psi = Ket::superposition(&b, &[(c(1.0, 0.0), &["a"]), (c(0.5, 0.5), &["c"])]).unwrap();
        let grid = TimeGrid::resolved(0.0, 4.0, h.max_frequency(), 200.0, 25).unwrap();
        let u = evolve_unitary(&h, &psi, &grid).unwrap();
        let m = evolve_master(&h, &[], &Operator::projector(&psi), &grid).unwrap();
        if let (States::Kets(k), States::Densities(r)) = (&u.states, &m.states) {
            for (k, r) in k.iter().zip(r) {
                assert!(Operator::projector(k).max_diff(r).unwrap() < 1e-8);
            }
        } else {
            panic!();
        }
    }
}
