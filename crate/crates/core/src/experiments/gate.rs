use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{computational_input, computational_target, RunOptions};
use crate::dynamics::{
    evolve_master_periodic, evolve_master_with, evolve_unitary_with, PhysicalityReport, States,
    Trajectory,
};
use crate::effective::{effective_model, rotate_lindblads, DressedBasis};
use crate::error::{Error, Result};
use crate::model::{
    build_driven, build_lindblad_set, mhz, solve_rab_detuning, DecayRates, DriveParams,
    InteractionParams, Preset, RabCondition, SchemeId, SchemeSpec,
};
use crate::qcore::{fidelity, DrivenHamiltonian, Ket, Operator, C64};

/// Interaction model used for a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateModel {
    DdForster,
    VdwReference,
}

impl GateModel {
    pub fn scheme(self) -> SchemeId {
        match self {
            GateModel::DdForster => SchemeId::Forster,
            GateModel::VdwReference => SchemeId::VdwReference,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "DD_FORSTER" | "DD" => Ok(GateModel::DdForster),
            "VDW_REFERENCE" | "VDW" => Ok(GateModel::VdwReference),
            _ => Err(Error::InvalidParameter(format!("unknown gate model `{s}`"))),
        }
    }
}

/// Nominal operating point of a gate: model, interaction, rates and the
/// drive with its detuning already fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSetup {
    pub model: GateModel,
    pub condition: RabCondition,
    pub drive: DriveParams,
    pub inter: InteractionParams,
    pub rates: DecayRates,
}

impl GateSetup {
    /// Detuning solved from `condition` at the nominal interaction.
    pub fn solved(
        model: GateModel,
        condition: RabCondition,
        rabi: f64,
        inter: InteractionParams,
        rates: DecayRates,
    ) -> Result<Self> {
        let v = crate::model::interaction_strength(model.scheme(), &inter)?;
        let detuning = solve_rab_detuning(condition, v, rabi)?;
        Ok(GateSetup {
            model,
            condition,
            drive: DriveParams::new(rabi, detuning),
            inter,
            rates,
        })
    }

    pub fn from_preset(p: &Preset) -> Result<Self> {
        let model = match p.scheme {
            SchemeId::Forster => GateModel::DdForster,
            SchemeId::VdwReference => GateModel::VdwReference,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "no gate model for scheme {other}"
                )))
            }
        };
        Self::solved(
            model,
            p.condition,
            mhz(p.rabi_mhz),
            p.interaction(),
            p.rates()?,
        )
    }

    /// Forster model at `Omega = 2 pi x 9.9 MHz`.
    pub fn dd_reference() -> Result<Self> {
        let p = Preset::named("forster-ravets")?;
        Self::solved(
            GateModel::DdForster,
            p.condition,
            mhz(9.9),
            p.interaction(),
            p.rates()?,
        )
    }

    /// Van der Waals model with its preset parameters.
    pub fn vdw_reference() -> Result<Self> {
        Self::from_preset(&Preset::named("vdw-reference")?)
    }

    /// Same model at another Rabi frequency, detuning re-solved.
    pub fn with_rabi(&self, rabi: f64) -> Result<Self> {
        Self::solved(
            self.model,
            self.condition,
            rabi,
            self.inter,
            self.rates.clone(),
        )
    }

    pub fn spec(&self) -> SchemeSpec {
        SchemeSpec::new(self.model.scheme())
    }

    pub fn without_decay(&self) -> Self {
        GateSetup {
            rates: self.rates.zeroed(),
            ..self.clone()
        }
    }
}

/// Relative deviations applied to the nominal drive and distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Deviations {
    pub d_omega: f64,
    pub d_delta: f64,
    pub d_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Propagation {
    /// Lab-frame master equation with the full Hamiltonian.
    Full,
    /// Averaged Hamiltonian in the dressed rotating frame.
    Effective,
}

/// One controlled-phase gate run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub theta: f64,
    /// Nominal `2 pi Delta / Omega^2`, us.
    pub gate_time: f64,
    pub model: GateModel,
    pub deviations: Deviations,
    pub propagation: Propagation,
    pub dissipation: bool,
}

impl GateSpec {
    /// Full dissipative run at the nominal point.
    pub fn new(setup: &GateSetup, theta: f64) -> Self {
        GateSpec {
            theta,
            gate_time: setup.drive.gate_time(),
            model: setup.model,
            deviations: Deviations::default(),
            propagation: Propagation::Full,
            dissipation: true,
        }
    }

    pub fn with_deviations(self, deviations: Deviations) -> Self {
        GateSpec { deviations, ..self }
    }
}

/// Outcome of a gate run.
#[derive(Debug, Clone, Serialize)]
pub struct GateResult {
    /// `<psi_ideal|rho(T)|psi_ideal>`.
    pub fidelity: f64,
    /// `sqrt(fidelity)`, the Uhlmann fidelity against the pure target.
    pub root_fidelity: f64,
    /// `arg(rho_{11,00}) - theta`, wrapped to `(-pi, pi]`.
    pub phase_error: f64,
    /// Population left outside the computational states.
    pub leakage: f64,
    pub gate_time: f64,
    pub drive: DriveParams,
    pub physicality: PhysicalityReport,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

/// Laser phase factor applied to each atom's drive at `T/2`, chosen so the
/// two-photon coupling is multiplied by `-e^{i theta}`.
pub fn phase_factor(theta: f64) -> C64 {
    C64::from_polar(1.0, (theta - PI) / 2.0)
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Runs the two-segment gate: nominal phase for `[0, T/2]`, shifted phase for
/// `[T/2, T]`; fidelity against `diag(1, 1, 1, e^{i theta})` applied to the
/// uniform computational superposition.
pub fn gate_fidelity(setup: &GateSetup, gate: &GateSpec, opts: &RunOptions) -> Result<GateResult> {
    if gate.model != setup.model {
        return Err(Error::InvalidParameter(
            "gate spec and setup disagree on the model".into(),
        ));
    }
    let nominal_time = setup.drive.gate_time();
    if ((gate.gate_time - nominal_time) / nominal_time).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "gate time {} differs from 2 pi Delta / Omega^2 = {nominal_time}",
            gate.gate_time
        )));
    }
    let dv = gate.deviations;
    let drive = DriveParams {
        rabi: setup.drive.rabi * (1.0 + dv.d_omega),
        detuning: setup.drive.detuning * (1.0 + dv.d_delta),
        ..setup.drive
    };
    let inter = setup
        .inter
        .with_distance(setup.inter.distance * (1.0 + dv.d_r));
    let spec = setup.spec();
    let lindblads = if gate.dissipation {
        build_lindblad_set(&spec, &setup.rates)?
    } else {
        Vec::new()
    };
    let second = DriveParams {
        phase: drive.phase + (gate.theta - PI) / 2.0,
        ..drive
    };
    let basis = spec.basis()?;
    let psi0 = computational_input(&basis)?;
    let t = gate.gate_time;

    let trajectory = match gate.propagation {
        Propagation::Full => {
            let h1 = build_driven(&spec, &drive, &inter)?;
            let h2 = build_driven(&spec, &second, &inter)?;
            two_segments(
                &h1,
                &h2,
                &lindblads,
                &psi0,
                t,
                Some(2.0 * PI / drive.detuning),
                opts,
            )?
        }
        Propagation::Effective => {
            let m1 = effective_model(&spec, &drive, &inter, None)?;
            let m2 = effective_model(&spec, &second, &inter, None)?;
            let dressed: &DressedBasis = &m1.frame.dressed;
            let ls = rotate_lindblads(&m1.frame, &lindblads);
            let h1 = DrivenHamiltonian::new(m1.h_eff.clone());
            let h2 = DrivenHamiltonian::new(m2.h_eff.clone());
            let psi_d = Ket::from_amplitudes(
                &dressed.basis,
                (dressed.unitary.matrix().adjoint() * psi0.amplitudes())
                    .as_slice()
                    .to_vec(),
            )?;
            let mut tr = two_segments(&h1, &h2, &ls, &psi_d, t, None, opts)?;
            to_product(&mut tr, dressed)?;
            tr
        }
    };
    let rho = trajectory.final_density();
    let target = computational_target(&basis, gate.theta)?;
    let fid = fidelity(&target, &rho)?;
    let i00 = basis.index_of(&["0", "0"])?;
    let i11 = basis.index_of(&["1", "1"])?;
    let phase_error = wrap(rho[(i11, i00)].arg() - gate.theta);
    let computational: f64 = [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
        .iter()
        .map(|l| basis.index_of(l).map(|i| rho[(i, i)].re))
        .sum::<Result<f64>>()?;
    Ok(GateResult {
        fidelity: fid,
        root_fidelity: fid.max(0.0).sqrt(),
        phase_error,
        leakage: 1.0 - computational,
        gate_time: t,
        drive,
        physicality: trajectory.physicality,
        trajectory,
    })
}

// Pure start and no collapse operators: propagate the ket.
fn two_segments(
    h1: &DrivenHamiltonian,
    h2: &DrivenHamiltonian,
    lindblads: &[Operator],
    psi0: &Ket,
    t: f64,
    period: Option<f64>,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let w = h1.max_frequency().max(h2.max_frequency());
    let half = RunOptions {
        samples: opts.samples.div_ceil(2).max(1),
        min_steps: opts.min_steps.div_ceil(2),
        ..*opts
    };
    let g1 = half.grid(0.0, t / 2.0, w)?;
    let g2 = half.grid(t / 2.0, t, w)?;
    if lindblads.is_empty() {
        let mut tr = evolve_unitary_with(h1, psi0, &g1, &opts.limits)?;
        let mid = match &tr.states {
            States::Kets(k) => k.last().unwrap().clone(),
            States::Densities(_) => unreachable!("unitary run stores kets"),
        };
        tr.append(evolve_unitary_with(h2, &mid, &g2, &opts.limits)?);
        return Ok(tr);
    }
    let run = |h: &DrivenHamiltonian, rho: &Operator, g: &crate::dynamics::TimeGrid| match period {
        Some(p) => evolve_master_periodic(h, lindblads, rho, g, p, &opts.limits),
        None => evolve_master_with(h, lindblads, rho, g, &opts.limits),
    };
    let mut tr = run(h1, &Operator::projector(psi0), &g1)?;
    let mid = tr.final_density();
    tr.append(run(h2, &mid, &g2)?);
    Ok(tr)
}

// Maps a dressed-frame trajectory back to the product basis.
fn to_product(tr: &mut Trajectory, dressed: &DressedBasis) -> Result<()> {
    match &mut tr.states {
        States::Densities(v) => {
            for r in v.iter_mut() {
                *r = dressed.to_product(r);
            }
        }
        States::Kets(v) => {
            let pb = dressed.product_basis().clone();
            for k in v.iter_mut() {
                *k = Ket::from_amplitudes(
                    &pb,
                    (dressed.unitary.matrix() * k.amplitudes())
                        .as_slice()
                        .to_vec(),
                )?;
            }
        }
    }
    Ok(())
}

/// Geometric controlled-phase gate with the full model and decay.
pub fn geometric_gate(setup: &GateSetup, theta: f64, opts: &RunOptions) -> Result<GateResult> {
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 2 pi), got {theta}"
        )));
    }
    gate_fidelity(setup, &GateSpec::new(setup, theta), opts)
}
