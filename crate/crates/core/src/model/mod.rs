//! Level schemes, drive and interaction Hamiltonians, antiblockade
//! conditions and decay channels.

mod params;
mod presets;
mod scheme;

use std::sync::Arc;

pub use params::{
    balanced_distance_ratio, condition_sensitivity, condition_sensitivity_fixed_rabi,
    crossover_distance, dd_strength, mhz, solve_rab_detuning, vdw_strength, DecayRates,
    DriveParams, InteractionParams, RabCondition,
};
pub use presets::{Preset, PRESET_NAMES};
pub use scheme::{Coupling, DressedDef, DriveSpec, SchemeId, SchemeSpec};

use crate::error::{Error, Result};
use crate::qcore::{c, Basis, DrivenHamiltonian, Ket, Operator, Tone, C64};

/// `V_d` for dipole-dipole schemes, `V_vdW` for the reference model.
pub fn interaction_strength(id: SchemeId, inter: &InteractionParams) -> Result<f64> {
    match id {
        SchemeId::VdwReference => inter.v_vdw(),
        _ => inter.v_d(),
    }
}

/// Single-atom transition `|to><from|` on `atom`, identity on the other.
pub fn local_transition(basis: &Arc<Basis>, atom: usize, to: &str, from: &str) -> Result<Operator> {
    let f = basis.factors();
    if f.len() != 2 || atom > 1 {
        return Err(Error::InvalidBasis("expected a two-atom basis".into()));
    }
    let mut op = Operator::zeros(basis);
    for spectator in &f[1 - atom] {
        let s = spectator.as_str();
        let (a, b) = if atom == 0 {
            ([to, s], [from, s])
        } else {
            ([s, to], [s, from])
        };
        let i = basis.index_of(&a)?;
        let j = basis.index_of(&b)?;
        op[(i, j)] = c(1.0, 0.0);
    }
    Ok(op)
}

/// Interaction Hamiltonian at coupling strength `v`.
pub fn build_interaction(spec: &SchemeSpec, basis: &Arc<Basis>, v: f64) -> Result<Operator> {
    let mut h = Operator::zeros(basis);
    for cpl in &spec.dd_term {
        let i = basis.index_of_pair(&cpl.ket)?;
        let j = basis.index_of_pair(&cpl.bra)?;
        let x = c(cpl.prefactor * v, 0.0);
        h[(i, j)] += x;
        if i != j {
            h[(j, i)] += x.conj();
        }
    }
    Ok(h)
}

/// `sum_drives |ground><rydberg|`; the drive couples as `f(t) A + h.c.`.
pub fn drive_operator(spec: &SchemeSpec, basis: &Arc<Basis>) -> Result<Operator> {
    let mut a = Operator::zeros(basis);
    for d in &spec.drives {
        a = &a + &local_transition(basis, d.atom, &d.ground, &d.rydberg)?;
    }
    Ok(a)
}

/// Tones of `f(t)`: `(Omega/2) e^{i phi} (e^{i Delta t} + e^{-i Delta t})`, or
/// only the `e^{i Delta t}` component for a single-tone drive.
pub fn drive_tones(drive: &DriveParams) -> Vec<Tone> {
    let a = C64::from_polar(drive.rabi / 2.0, drive.phase);
    let mut tones = vec![Tone {
        amplitude: a,
        freq: drive.detuning,
    }];
    if drive.bichromatic {
        tones.push(Tone {
            amplitude: a,
            freq: -drive.detuning,
        });
    }
    tones
}

/// Full interaction-picture Hamiltonian as a harmonic decomposition.
pub fn build_driven(
    spec: &SchemeSpec,
    drive: &DriveParams,
    inter: &InteractionParams,
) -> Result<DrivenHamiltonian> {
    drive.validate()?;
    let basis = spec.basis()?;
    let v = interaction_strength(spec.id, inter)?;
    let h_d = build_interaction(spec, &basis, v)?;
    DrivenHamiltonian::new(h_d).with_term(drive_operator(spec, &basis)?, drive_tones(drive))
}

pub fn build_full_hamiltonian(
    spec: &SchemeSpec,
    drive: &DriveParams,
    inter: &InteractionParams,
    t: f64,
) -> Result<Operator> {
    Ok(build_driven(spec, drive, inter)?.at(t))
}

/// Collapse operators `sqrt(gamma_r/2) |g><r|` for every atom, Rydberg level
/// `r` and ground level `g`.
pub fn build_lindblad_set(spec: &SchemeSpec, rates: &DecayRates) -> Result<Vec<Operator>> {
    let basis = spec.basis()?;
    let mut out = Vec::new();
    for atom in 0..2 {
        for r in spec.rydberg_levels(atom) {
            let gamma = rates
                .get(r)
                .ok_or_else(|| Error::MissingRate(r.to_string()))?;
            if gamma < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative decay rate for `{r}`"
                )));
            }
            for g in ["0", "1"] {
                out.push(local_transition(&basis, atom, g, r)?.scale_re((gamma / 2.0).sqrt()));
            }
        }
    }
    Ok(out)
}

/// Named dressed or superposition state from the scheme's definitions.
pub fn dressed_ket(spec: &SchemeSpec, basis: &Arc<Basis>, name: &str) -> Result<Ket> {
    let def = spec
        .dressed_defs
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownLevel(name.to_string()))?;
    let mut amps = vec![c(0.0, 0.0); basis.dim()];
    for (l, w) in &def.terms {
        amps[basis.index_of_pair(l)?] += c(*w, 0.0);
    }
    Ket::from_amplitudes(basis, amps)
}

/// Indices of basis states with both atoms in Rydberg levels.
pub fn double_excitation_indices(spec: &SchemeSpec, basis: &Basis) -> Vec<usize> {
    (0..basis.dim())
        .filter(|&i| spec.excitations(basis, i) == 2)
        .collect()
}

pub fn single_excitation_indices(spec: &SchemeSpec, basis: &Basis) -> Vec<usize> {
    (0..basis.dim())
        .filter(|&i| spec.excitations(basis, i) == 1)
        .collect()
}
