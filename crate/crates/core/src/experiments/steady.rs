use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{periodic_steady_state, steady_state_with, SteadyMethod, SteadyOptions};
use crate::effective::{effective_model, rotate_lindblads, EffectiveModel};
use crate::error::{Error, Result};
use crate::model::{
    build_driven, build_lindblad_set, mhz, solve_rab_detuning, DecayRates, DriveParams,
    InteractionParams, Preset, RabCondition, SchemeSpec,
};
use crate::qcore::{c, fidelity, Basis, Ket, Operator};

/// `omega / Omega'_eff` of the full-model cross-check.
pub const FULL_CHECK_RATIO: f64 = 0.5;

/// 30 log-spaced ratios over `[0.01, 1]`.
pub fn default_steady_ratios() -> Vec<f64> {
    (0..30)
        .map(|k| 10f64.powf(-2.0 + 2.0 * k as f64 / 29.0))
        .collect()
}

/// Microwave coupling between the triplet and `|00>`, `|11>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrowaveParams {
    /// `omega`, rad/us.
    pub omega_mw: f64,
    /// `omega / Omega'_eff` with `Omega'_eff = sqrt(2) Omega^2 / (2 Delta)`.
    pub ratio: f64,
}

impl MicrowaveParams {
    pub fn effective_rabi(drive: &DriveParams) -> f64 {
        SQRT_2 * drive.rabi * drive.rabi / (2.0 * drive.detuning)
    }

    pub fn from_ratio(ratio: f64, drive: &DriveParams) -> Self {
        MicrowaveParams {
            omega_mw: ratio * Self::effective_rabi(drive),
            ratio,
        }
    }

    pub fn from_omega(omega_mw: f64, drive: &DriveParams) -> Self {
        MicrowaveParams {
            omega_mw,
            ratio: omega_mw / Self::effective_rabi(drive),
        }
    }
}

fn ket(basis: &Arc<Basis>, terms: &[(f64, [&str; 2])]) -> Result<Ket> {
    let t: Vec<_> = terms.iter().map(|(w, l)| (c(*w, 0.0), &l[..])).collect();
    Ket::superposition(basis, &t)
}

/// `(|01> - |10>) / sqrt 2`.
pub fn singlet(basis: &Arc<Basis>) -> Result<Ket> {
    ket(basis, &[(1.0, ["0", "1"]), (-1.0, ["1", "0"])])
}

/// `(sqrt(2) omega / 2) (|00> + |11>) <T| + h.c.` with `T` the triplet.
pub fn microwave_hamiltonian(basis: &Arc<Basis>, omega_mw: f64) -> Result<Operator> {
    let t = ket(basis, &[(1.0, ["0", "1"]), (1.0, ["1", "0"])])?;
    let g = ket(basis, &[(1.0, ["0", "0"]), (1.0, ["1", "1"])])?;
    // |g> and |T> are normalized, so the prefactor is sqrt(2) * sqrt(2) omega / 2
    let x = Operator::outer(&g, &t)?.scale_re(omega_mw);
    Ok(&x + &x.dagger())
}

/// Dissipative preparation setup: single-tone Forster drive at `V = sqrt(2) Delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyModel {
    pub drive: DriveParams,
    pub inter: InteractionParams,
    pub rates: DecayRates,
}

impl SteadyModel {
    /// `Omega = 2 pi x 1 MHz`, `r = 3 um`, Forster preset coefficients and lifetimes.
    pub fn reference() -> Result<Self> {
        let p = Preset::named("forster-ravets")?;
        Self::new(mhz(1.0), p.interaction(), p.rates()?)
    }

    pub fn new(rabi: f64, inter: InteractionParams, rates: DecayRates) -> Result<Self> {
        let detuning = solve_rab_detuning(RabCondition::ForsterNostark, inter.v_d()?, rabi)?;
        let drive = DriveParams {
            rabi,
            detuning,
            bichromatic: false,
            phase: 0.0,
        };
        Ok(SteadyModel {
            drive,
            inter,
            rates,
        })
    }

    pub fn spec(&self) -> SchemeSpec {
        SchemeSpec::new(crate::model::SchemeId::Forster)
    }

    /// Effective model with the microwave included as static coupling.
    pub fn effective(&self, mw: &MicrowaveParams) -> Result<EffectiveModel> {
        let spec = self.spec();
        let hmw = microwave_hamiltonian(&spec.basis()?, mw.omega_mw)?;
        effective_model(&spec, &self.drive, &self.inter, Some(&hmw))
    }

    /// Measured `<11|H_eff|+>` against `Omega'_eff / 2`; fails when the single
    /// tone does not produce the resonant two-photon coupling.
    pub fn check_coupling(&self) -> Result<f64> {
        let m = effective_model(&self.spec(), &self.drive, &self.inter, None)?;
        let b = &m.frame.dressed.basis;
        let i11 = b.index_of(&["11"]).or_else(|_| b.index_of(&["1", "1"]))?;
        let ip = b.index_of(&["+"])?;
        let got = m.h_eff[(i11, ip)].norm();
        let want = MicrowaveParams::effective_rabi(&self.drive) / 2.0;
        let dev = (got - want).abs() / want;
        if dev > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "single-tone coupling <11|H|+> = {got:.6e} differs from {want:.6e}"
            )));
        }
        Ok(got)
    }
}

/// One point of the steady-state scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SteadyPoint {
    pub ratio: f64,
    pub omega_mw: f64,
    pub infidelity: f64,
}

/// `1 - <S|rho_ss|S>` with `rho_ss` the nullspace of the effective generator.
pub fn steady_entanglement(model: &SteadyModel, mw: &MicrowaveParams) -> Result<f64> {
    let eff = model.effective(mw)?;
    let spec = model.spec();
    let ls = rotate_lindblads(&eff.frame, &build_lindblad_set(&spec, &model.rates)?);
    let rho = steady_state_with(
        &eff.h_eff,
        &ls,
        SteadyMethod::Nullspace,
        &SteadyOptions::default(),
    )?;
    let rho = eff.frame.dressed.to_product(&rho);
    Ok(1.0 - fidelity(&singlet(rho.basis())?, &rho)?)
}

/// Same quantity from the full periodically driven model, as the
/// stroboscopic fixed point of the one-period propagator.
pub fn steady_full_model(
    model: &SteadyModel,
    mw: &MicrowaveParams,
    opts: &SteadyOptions,
) -> Result<f64> {
    let rho = steady_full_state(model, mw, opts)?;
    Ok(1.0 - fidelity(&singlet(rho.basis())?, &rho)?)
}

/// Stroboscopic steady density of the full model on the product basis.
pub fn steady_full_state(
    model: &SteadyModel,
    mw: &MicrowaveParams,
    opts: &SteadyOptions,
) -> Result<Operator> {
    let spec = model.spec();
    let basis = spec.basis()?;
    let mut driven = build_driven(&spec, &model.drive, &model.inter)?;
    driven.static_part = driven
        .static_part
        .checked_add(&microwave_hamiltonian(&basis, mw.omega_mw)?)?;
    let ls = build_lindblad_set(&spec, &model.rates)?;
    periodic_steady_state(&driven, &ls, 2.0 * PI / model.drive.detuning, opts)
}

/// Effective-model infidelity over a set of `omega / Omega'_eff` ratios.
pub fn steady_scan(model: &SteadyModel, ratios: &[f64]) -> Result<Vec<SteadyPoint>> {
    model.check_coupling()?;
    ratios
        .par_iter()
        .map(|&r| {
            let mw = MicrowaveParams::from_ratio(r, &model.drive);
            Ok(SteadyPoint {
                ratio: r,
                omega_mw: mw.omega_mw,
                infidelity: steady_entanglement(model, &mw)?,
            })
        })
        .collect()
}
