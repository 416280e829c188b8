//! Scenario runners: population transfer, controlled-phase gates,
//! robustness sweeps, dissipative steady states and the crossover fit.

mod fit;
mod gate;
mod population;
mod scan;
mod steady;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use fit::fit_power_law;
pub use gate::{
    gate_fidelity, geometric_gate, phase_factor, Deviations, GateModel, GateResult, GateSetup,
    GateSpec, Propagation,
};
pub use population::{population_dynamics, population_window, PopulationRun};
pub use scan::{
    default_dr_values, default_rabi_values, distance_cases, fidelity_window, robustness_scan,
    DistanceCases, ScanAxis, ScanPoint, SweepResult, DEFAULT_DEVIATION_POINTS, WEAK_VDW_FACTOR,
};
pub use steady::{
    default_steady_ratios, microwave_hamiltonian, singlet, steady_entanglement, steady_full_model,
    steady_full_state, steady_scan, MicrowaveParams, SteadyModel, SteadyPoint, FULL_CHECK_RATIO,
};

use crate::dynamics::{PhysicalityLimits, TimeGrid, MIN_STEPS_PER_PERIOD, STEPS_PER_PERIOD};
use crate::error::Result;
use crate::qcore::{c, Basis, Ket};

/// Numerical settings shared by the scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    /// RK4 steps per period of the fastest frequency in the Hamiltonian.
    pub steps_per_period: f64,
    /// Lower bound on the steps of each propagation segment, so short
    /// strongly driven runs are still finely resolved.
    pub min_steps: usize,
    /// Stored samples per propagation segment.
    pub samples: usize,
    pub limits: PhysicalityLimits,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            steps_per_period: STEPS_PER_PERIOD,
            min_steps: 10_000,
            samples: 200,
            limits: PhysicalityLimits::default(),
        }
    }
}

impl RunOptions {
    /// Same settings with the step halved.
    pub fn refined(&self) -> Self {
        RunOptions {
            steps_per_period: self.steps_per_period * 2.0,
            min_steps: self.min_steps * 2,
            ..*self
        }
    }

    /// Grid on `[t0, t1]` whose samples fall at `t0 + k (t1 - t0) / samples`.
    pub fn grid(&self, t0: f64, t1: f64, omega_max: f64) -> Result<TimeGrid> {
        let spp = self.steps_per_period.max(MIN_STEPS_PER_PERIOD);
        let samples = self.samples.max(1);
        let target = 2.0 * std::f64::consts::PI / omega_max.max(1e-300) / spp;
        let floor = self.min_steps.div_ceil(samples);
        let per_sample =
            (((t1 - t0) / samples as f64 / target).ceil().max(1.0) as usize).max(floor);
        let n = per_sample * samples;
        TimeGrid::new(t0, t1, (t1 - t0) / n as f64, per_sample, omega_max)
    }
}

/// `(|00> + |01> + |10> + |11>) / 2` on a two-atom basis with ground levels `0`, `1`.
pub fn computational_input(basis: &Arc<Basis>) -> Result<Ket> {
    let one = c(1.0, 0.0);
    Ket::superposition(
        basis,
        &[
            (one, &["0", "0"]),
            (one, &["0", "1"]),
            (one, &["1", "0"]),
            (one, &["1", "1"]),
        ],
    )
}

/// Controlled-phase image of [`computational_input`].
pub fn computational_target(basis: &Arc<Basis>, theta: f64) -> Result<Ket> {
    let one = c(1.0, 0.0);
    Ket::superposition(
        basis,
        &[
            (one, &["0", "0"]),
            (one, &["0", "1"]),
            (one, &["1", "0"]),
            (num_complex::Complex64::from_polar(1.0, theta), &["1", "1"]),
        ],
    )
}
