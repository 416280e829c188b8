use serde::Serialize;

use super::RunOptions;
use crate::dynamics::{evolve_master_with, States, Trajectory};
use crate::effective::{effective_model, rotate_lindblads};
use crate::error::Result;
use crate::model::{
    build_driven, build_lindblad_set, double_excitation_indices, dressed_ket,
    single_excitation_indices, DecayRates, DriveParams, InteractionParams, Preset, SchemeSpec,
};
use crate::qcore::{DrivenHamiltonian, Ket, Operator};

/// Full-model population transfer from `|11>` with an effective-model overlay.
#[derive(Debug, Clone, Serialize)]
pub struct PopulationRun {
    pub drive: DriveParams,
    /// `2 pi Delta / Omega^2`, us.
    pub gate_time: f64,
    pub peak_double: f64,
    pub t_peak: f64,
    pub p11_final: f64,
    /// Largest gap between full and effective `P_11` / `P_double` over the samples.
    pub overlay_deviation: f64,
    #[serde(skip)]
    pub full: Trajectory,
    #[serde(skip)]
    pub effective: Trajectory,
}

/// Runs a preset over one effective cycle `[0, T]`.
pub fn population_dynamics(preset: &Preset, opts: &RunOptions) -> Result<PopulationRun> {
    let drive = preset.drive()?;
    population_window(
        &preset.spec(),
        &drive,
        &preset.interaction(),
        &preset.rates()?,
        drive.gate_time(),
        opts,
    )
}

/// Same as [`population_dynamics`] over `[0, t_end]` with explicit parameters.
pub fn population_window(
    spec: &SchemeSpec,
    drive: &DriveParams,
    inter: &InteractionParams,
    rates: &DecayRates,
    t_end: f64,
    opts: &RunOptions,
) -> Result<PopulationRun> {
    let basis = spec.basis()?;
    let ls = build_lindblad_set(spec, rates)?;
    let rho0 = Operator::projector(&Ket::basis_state(&basis, &["1", "1"])?);

    let h = build_driven(spec, drive, inter)?;
    let grid = opts.grid(0.0, t_end, h.max_frequency())?;
    let mut full = evolve_master_with(&h, &ls, &rho0, &grid, &opts.limits)?;

    let model = effective_model(spec, drive, inter, None)?;
    let dressed = &model.frame.dressed;
    let he = DrivenHamiltonian::new(model.h_eff.clone());
    let grid_e = opts.grid(0.0, t_end, he.max_frequency())?;
    let mut effective = evolve_master_with(
        &he,
        &rotate_lindblads(&model.frame, &ls),
        &dressed.to_dressed(&rho0),
        &grid_e,
        &opts.limits,
    )?;
    if let States::Densities(v) = &mut effective.states {
        for r in v.iter_mut() {
            *r = dressed.to_product(r);
        }
    }

    let i11 = basis.index_of(&["1", "1"])?;
    let doubles = double_excitation_indices(spec, &basis);
    let singles = single_excitation_indices(spec, &basis);
    for tr in [&mut full, &mut effective] {
        tr.add_basis_populations();
        let p11 = tr.population_sum(&[i11]);
        tr.add_observable("P_11", p11);
        let ps = tr.population_sum(&singles);
        tr.add_observable("P_single", ps);
        let pd = tr.population_sum(&doubles);
        tr.add_observable("P_double", pd);
        for def in &spec.dressed_defs {
            let k = dressed_ket(spec, &basis, &def.name)?;
            let p = tr.population_of(&k)?;
            tr.add_observable(&format!("P_{}", def.name), p);
        }
    }

    let pd = &full.observables["P_double"];
    let (k_peak, peak_double) =
        pd.iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    let p11_final = *full.observables["P_11"].last().unwrap();
    let mut overlay_deviation: f64 = 0.0;
    for key in ["P_11", "P_double"] {
        for (a, b) in full.observables[key]
            .iter()
            .zip(&effective.observables[key])
        {
            overlay_deviation = overlay_deviation.max((a - b).abs());
        }
    }
    Ok(PopulationRun {
        drive: *drive,
        gate_time: drive.gate_time(),
        peak_double,
        t_peak: full.times[k_peak],
        p11_final,
        overlay_deviation,
        full,
        effective,
    })
}
