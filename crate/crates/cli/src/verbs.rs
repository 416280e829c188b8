//! One runner per verb. Each returns the resolved inputs (hashed into the
//! run id and stored in the sidecar) and the output table.

use std::f64::consts::PI;

use ddrab::dynamics::{PhysicalityLimits, SteadyOptions};
use ddrab::effective::verify_closed_form;
use ddrab::experiments::{
    default_dr_values, default_rabi_values, default_steady_ratios, distance_cases, fidelity_window,
    gate_fidelity, population_window, robustness_scan, steady_full_model, steady_scan, Deviations,
    GateModel, GateSetup, GateSpec, MicrowaveParams, Propagation, RunOptions, ScanAxis,
    SteadyModel, DEFAULT_DEVIATION_POINTS,
};
use ddrab::model::{crossover_distance, mhz, SchemeId, SchemeSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{condition_name, ResolvedModel, RunConfig};
use crate::output::{Cell, Column, Table};
use crate::CliError;

/// Table plus an optional invariant violation, reported after the artifacts are written.
pub struct Outcome {
    pub inputs: Value,
    pub table: Table,
    pub violation: Option<String>,
}

fn ok(inputs: Value, table: Table) -> Result<Outcome, CliError> {
    Ok(Outcome {
        inputs,
        table,
        violation: None,
    })
}

pub fn run_options(cfg: &RunConfig) -> RunOptions {
    let d = RunOptions::default();
    let n = &cfg.numerics;
    let t = &cfg.tolerances;
    let l = PhysicalityLimits::default();
    RunOptions {
        steps_per_period: n.steps_per_period.unwrap_or(d.steps_per_period),
        min_steps: n.min_steps.unwrap_or(d.min_steps),
        samples: n.samples.unwrap_or(d.samples),
        limits: PhysicalityLimits {
            trace: t.trace.unwrap_or(l.trace),
            hermiticity: t.hermiticity.unwrap_or(l.hermiticity),
            min_eigenvalue: t.min_eigenvalue.unwrap_or(l.min_eigenvalue),
            norm: t.norm.unwrap_or(l.norm),
        },
    }
}

fn model_json(m: &ResolvedModel) -> Value {
    json!({
        "preset": m.preset,
        "scheme": m.scheme.to_string(),
        "condition": condition_name(m.condition),
        "rabi_rad_per_us": m.drive.rabi,
        "detuning_rad_per_us": m.drive.detuning,
        "bichromatic": m.drive.bichromatic,
        "c3_ghz_um3": m.inter.c3,
        "c6_ghz_um6": m.inter.c6,
        "distance_um": m.inter.distance,
        "decay_rates_per_us": m.rates.rates,
    })
}

fn options_json(o: &RunOptions) -> Value {
    serde_json::to_value(o).expect("options serialize")
}

fn gate_setup(m: &ResolvedModel) -> Result<GateSetup, CliError> {
    let model = match m.scheme {
        SchemeId::Forster => GateModel::DdForster,
        SchemeId::VdwReference => GateModel::VdwReference,
        other => {
            return Err(CliError::Config(format!(
                "gates are defined for the FORSTER and VDW_REFERENCE schemes, not {other}"
            )))
        }
    };
    Ok(GateSetup {
        model,
        condition: m.condition,
        drive: m.drive,
        inter: m.inter,
        rates: m.rates.clone(),
    })
}

pub fn dynamics(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.resolve()?;
    let opts = run_options(cfg);
    let t_end = cfg
        .dynamics
        .t_end
        .map(|q| q.value)
        .unwrap_or_else(|| m.drive.gate_time());
    let inputs =
        json!({ "model": model_json(&m), "t_end_us": t_end, "options": options_json(&opts) });
    let spec = SchemeSpec::new(m.scheme);
    let run = population_window(&spec, &m.drive, &m.inter, &m.rates, t_end, &opts)?;

    let mut t = Table::default();
    t.columns.push(Column::new("t", "us", "time"));
    let basis_keys: Vec<String> = run
        .full
        .basis()
        .labels()
        .iter()
        .map(|l| format!("P_{l}"))
        .collect();
    let mut keys: Vec<&String> = basis_keys
        .iter()
        .filter(|k| run.full.observables.contains_key(*k))
        .collect();
    keys.extend(
        run.full
            .observables
            .keys()
            .filter(|k| !basis_keys.contains(k)),
    );
    for k in &keys {
        t.columns.push(Column::new(
            k.as_str(),
            "1",
            format!("population {}, full master equation", &k[2..]),
        ));
    }
    let overlay = ["P_11", "P_double"];
    let with_eff = run.effective.times.len() == run.full.times.len();
    if with_eff {
        for k in overlay {
            t.columns.push(Column::new(
                format!("eff_{k}"),
                "1",
                format!("population {}, effective model", &k[2..]),
            ));
        }
    }
    for (i, &time) in run.full.times.iter().enumerate() {
        let mut row = vec![time];
        row.extend(keys.iter().map(|k| run.full.observables[*k][i]));
        if with_eff {
            row.extend(overlay.iter().map(|k| run.effective.observables[*k][i]));
        }
        t.push_num_row(row);
    }
    t.note("gate_time_us", run.gate_time);
    t.note("peak_double", run.peak_double);
    t.note("t_peak_us", run.t_peak);
    t.note("p11_final", run.p11_final);
    t.note("overlay_deviation", run.overlay_deviation);
    t.note("physicality", run.full.physicality);
    ok(inputs, t)
}

fn gate_columns(t: &mut Table) {
    t.columns = vec![
        Column::new("theta", "rad", "target controlled phase"),
        Column::new("fidelity", "1", "<psi_target|rho(T)|psi_target>"),
        Column::new("root_fidelity", "1", "square root of fidelity"),
        Column::new("phase_error", "rad", "arg(rho_11,00) - theta"),
        Column::new(
            "leakage",
            "1",
            "population outside the computational states",
        ),
        Column::new("gate_time", "us", "2 pi Delta / Omega^2"),
        Column::new("rabi", "rad/us", "Rabi frequency after deviations"),
        Column::new("detuning", "rad/us", "detuning after deviations"),
    ];
}

pub fn gate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.resolve()?;
    let setup = gate_setup(&m)?;
    let opts = run_options(cfg);
    let g = &cfg.gate;
    let propagation = match g
        .propagation
        .as_deref()
        .map(str::to_ascii_uppercase)
        .as_deref()
    {
        None | Some("FULL") => Propagation::Full,
        Some("EFFECTIVE") => Propagation::Effective,
        Some(other) => return Err(CliError::Config(format!("unknown propagation `{other}`"))),
    };
    let spec = GateSpec {
        propagation,
        dissipation: g.dissipation,
        ..GateSpec::new(&setup, g.theta.map(|q| q.value).unwrap_or(PI)).with_deviations(
            Deviations {
                d_omega: g.d_omega,
                d_delta: g.d_delta,
                d_r: g.d_r,
            },
        )
    };
    let inputs = json!({ "model": model_json(&m), "gate": spec, "options": options_json(&opts) });
    let r = gate_fidelity(&setup, &spec, &opts)?;
    let mut t = Table::default();
    gate_columns(&mut t);
    t.push_num_row([
        spec.theta,
        r.fidelity,
        r.root_fidelity,
        r.phase_error,
        r.leakage,
        r.gate_time,
        r.drive.rabi,
        r.drive.detuning,
    ]);
    t.note("fidelity", r.fidelity);
    t.note("physicality", r.physicality);
    ok(inputs, t)
}

pub fn geometric(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.resolve()?;
    let setup = gate_setup(&m)?;
    let opts = run_options(cfg);
    let thetas: Vec<f64> = match &cfg.geometric.thetas {
        Some(v) => v.iter().map(|q| q.value).collect(),
        None => vec![PI, 0.75 * PI, 0.5 * PI, 0.25 * PI, PI / 6.0],
    };
    let inputs =
        json!({ "model": model_json(&m), "thetas_rad": thetas, "options": options_json(&opts) });
    let results: Vec<_> = thetas
        .par_iter()
        .map(|&th| ddrab::experiments::geometric_gate(&setup, th, &opts))
        .collect::<Result<_, _>>()?;
    let mut t = Table::default();
    gate_columns(&mut t);
    for (th, r) in thetas.iter().zip(&results) {
        t.push_num_row([
            *th,
            r.fidelity,
            r.root_fidelity,
            r.phase_error,
            r.leakage,
            r.gate_time,
            r.drive.rabi,
            r.drive.detuning,
        ]);
    }
    t.note(
        "fidelities",
        results.iter().map(|r| r.fidelity).collect::<Vec<_>>(),
    );
    ok(inputs, t)
}

fn scan_curves(cfg: &RunConfig, which: &str) -> Result<Vec<(String, GateSetup)>, CliError> {
    let pair = |(a, b): (GateSetup, GateSetup)| vec![("dd".to_string(), a), ("vdw".to_string(), b)];
    Ok(match which {
        "reference" => pair((GateSetup::dd_reference()?, GateSetup::vdw_reference()?)),
        "equal-strength" => pair(distance_cases()?.equal_strength),
        "strong-dipole" => pair(distance_cases()?.strong_dipole),
        "config" => {
            let m = cfg.resolve()?;
            let label = m.preset.clone().unwrap_or_else(|| m.scheme.to_string());
            vec![(label, gate_setup(&m)?)]
        }
        other => return Err(CliError::Config(format!("unknown scan curves `{other}`"))),
    })
}

pub fn scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.scan;
    let axis = ScanAxis::parse(s.axis.as_deref().unwrap_or("dOmega"))?;
    let default_curves = if axis == ScanAxis::Dr {
        "equal-strength"
    } else {
        "reference"
    };
    let which = s.curves.as_deref().unwrap_or(default_curves);
    let values: Vec<f64> = match (axis, &s.values, &s.rabi) {
        (ScanAxis::OmegaAbs, None, Some(r)) => r.iter().map(|q| cfg.angular(q)).collect(),
        (ScanAxis::OmegaAbs, None, None) => default_rabi_values(),
        (ScanAxis::OmegaAbs, Some(_), _) => {
            return Err(CliError::Config(
                "omega_abs takes `scan.rabi`, not `scan.values`".into(),
            ))
        }
        (_, _, Some(_)) => {
            return Err(CliError::Config(format!(
                "{axis} takes `scan.values`, not `scan.rabi`"
            )))
        }
        (_, Some(v), None) => v.clone(),
        (ScanAxis::Dr, None, None) => default_dr_values(),
        (_, None, None) => {
            let n = DEFAULT_DEVIATION_POINTS;
            (0..n)
                .map(|k| -0.1 + 0.2 * k as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let curves = scan_curves(cfg, which)?;
    let opts = run_options(cfg);
    let setups: Vec<Value> = curves
        .iter()
        .map(|(l, g)| json!({ "label": l, "setup": g }))
        .collect();
    let inputs = json!({
        "axis": axis.to_string(),
        "curves": which,
        "values": values,
        "setups": setups,
        "options": options_json(&opts),
    });
    let res = robustness_scan(axis, &curves, &values, &opts)?;

    let (unit, desc) = match axis {
        ScanAxis::OmegaAbs => ("rad/us", "Rabi frequency"),
        ScanAxis::DOmega => ("1", "relative Rabi deviation"),
        ScanAxis::DDelta => ("1", "relative detuning deviation"),
        ScanAxis::Dr => ("1", "relative distance deviation"),
    };
    let mut t = Table::default();
    t.columns.push(Column::new(axis.to_string(), unit, desc));
    for l in &res.labels {
        t.columns.push(Column::new(
            format!("fidelity_{l}"),
            "1",
            format!("CZ fidelity, {l}"),
        ));
    }
    if axis == ScanAxis::OmegaAbs {
        for l in &res.labels {
            t.columns.push(Column::new(
                format!("detuning_{l}"),
                "rad/us",
                format!("re-solved detuning, {l}"),
            ));
        }
    }
    for (k, &v) in res.values.iter().enumerate() {
        let mut row = vec![v];
        row.extend(res.points.iter().map(|c| c[k].fidelity));
        if axis == ScanAxis::OmegaAbs {
            row.extend(res.points.iter().map(|c| c[k].detuning));
        }
        t.push_num_row(row);
    }
    for (c, l) in res.labels.iter().enumerate() {
        let f = res.fidelities(c);
        t.note(
            &format!("window_above_0.9.{l}"),
            fidelity_window(&res.values, &f, 0.9),
        );
    }
    t.note("metadata", &res.metadata);
    ok(inputs, t)
}

pub fn steady(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.resolve()?;
    if m.scheme != SchemeId::Forster {
        return Err(CliError::Config(
            "steady state is defined for the FORSTER scheme".into(),
        ));
    }
    let rabi = cfg
        .steady
        .rabi
        .as_ref()
        .map(|q| cfg.angular(q))
        .unwrap_or(mhz(1.0));
    let model = SteadyModel::new(rabi, m.inter, m.rates.clone())?;
    let ratios = cfg
        .steady
        .ratios
        .clone()
        .unwrap_or_else(default_steady_ratios);
    let inputs = json!({
        "model": model,
        "ratios": ratios,
        "full_check": cfg.steady.full_check,
    });
    let pts = steady_scan(&model, &ratios)?;
    let mut t = Table::with_columns(vec![
        Column::new("ratio", "1", "omega / Omega'_eff"),
        Column::new("omega_mw", "rad/us", "microwave Rabi frequency"),
        Column::new("infidelity", "1", "1 - <S|rho_ss|S>, effective model"),
    ]);
    for p in &pts {
        t.push_num_row([p.ratio, p.omega_mw, p.infidelity]);
    }
    if let Some(best) = pts
        .iter()
        .min_by(|a, b| a.infidelity.total_cmp(&b.infidelity))
    {
        t.note("min_infidelity", best.infidelity);
        t.note("min_ratio", best.ratio);
    }
    if let Some(r) = cfg.steady.full_check {
        let mw = MicrowaveParams::from_ratio(r, &model.drive);
        let full = steady_full_model(&model, &mw, &SteadyOptions::default())?;
        t.note("full_check_ratio", r);
        t.note("full_check_infidelity", full);
    }
    ok(inputs, t)
}

pub fn effective_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.resolve()?;
    let spec = SchemeSpec::new(m.scheme);
    let inputs = json!({ "model": model_json(&m) });
    let chk = verify_closed_form(&spec, &m.drive, &m.inter)?;
    let tol = cfg.tolerances.closed_form.unwrap_or(1e-10);

    let show = |name: &str, rows: &[Vec<(f64, f64)>]| {
        println!("{name} (rad/us), rows and columns {}", chk.labels.join(" "));
        for r in rows {
            let cells: Vec<String> = r
                .iter()
                .map(|(re, im)| format!("{re:+.6e}{im:+.6e}i"))
                .collect();
            println!("  {}", cells.join("  "));
        }
    };
    show("generated", &chk.generated);
    show("closed form", &chk.closed_form);
    let rel = chk.max_deviation / chk.scale;
    println!(
        "max deviation: {:.3e} rad/us = {:.3e} x Omega^2/Delta",
        chk.max_deviation, rel
    );

    let mut t = Table::with_columns(vec![
        Column::new("row", "", "basis label"),
        Column::new("col", "", "basis label"),
        Column::new("generated_re", "rad/us", "generated effective Hamiltonian"),
        Column::new("generated_im", "rad/us", "generated effective Hamiltonian"),
        Column::new("closed_re", "rad/us", "closed-form effective Hamiltonian"),
        Column::new("closed_im", "rad/us", "closed-form effective Hamiltonian"),
        Column::new("deviation", "rad/us", "modulus of the difference"),
    ]);
    for (i, ri) in chk.labels.iter().enumerate() {
        for (j, cj) in chk.labels.iter().enumerate() {
            let (g, c) = (chk.generated[i][j], chk.closed_form[i][j]);
            let d = ((g.0 - c.0).powi(2) + (g.1 - c.1).powi(2)).sqrt();
            let mut row = vec![Cell::Text(ri.clone()), Cell::Text(cj.clone())];
            row.extend([g.0, g.1, c.0, c.1, d].map(Cell::Num));
            t.rows.push(row);
        }
    }
    t.note("max_deviation", chk.max_deviation);
    t.note("scale", chk.scale);
    t.note("relative_deviation", rel);
    t.note("tolerance", tol);
    Ok(Outcome {
        inputs,
        table: t,
        violation: (rel >= tol)
            .then(|| format!("closed-form deviation {rel:.3e} exceeds {tol:.1e}")),
    })
}

pub fn crossover(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.resolve()?;
    if m.inter.c3 == 0.0 {
        return Err(CliError::Config(
            "crossover needs a nonzero `interaction.c3`".into(),
        ));
    }
    let defects: Vec<f64> = match &cfg.crossover.defects {
        Some(v) => v.iter().map(|q| cfg.angular(q)).collect(),
        None => (0..13).map(|k| mhz(10f64.powf(k as f64 / 4.0))).collect(),
    };
    let inputs = json!({ "c3_ghz_um3": m.inter.c3, "defects_rad_per_us": defects });
    let mut t = Table::with_columns(vec![
        Column::new("defect", "MHz", "Forster defect, ordinary frequency"),
        Column::new("r_c", "um", "crossover distance (4 C3^2 / delta^2)^(1/6)"),
    ]);
    for &d in &defects {
        let ghz = d / (2.0 * PI) / 1e3;
        t.push_num_row([ghz * 1e3, crossover_distance(m.inter.c3, ghz)?]);
    }
    ok(inputs, t)
}
