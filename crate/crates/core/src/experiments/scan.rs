use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gate::{gate_fidelity, Deviations, GateModel, GateSetup, GateSpec};
use super::RunOptions;
use crate::dynamics::PhysicalityReport;
use crate::error::{Error, Result};
use crate::model::{mhz, InteractionParams, RabCondition};

/// Points per deviation axis when no range is given.
pub const DEFAULT_DEVIATION_POINTS: usize = 41;

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanAxis {
    /// Relative Rabi deviation `dOmega / Omega`.
    #[serde(rename = "dOmega")]
    DOmega,
    /// Relative detuning deviation `dDelta / Delta`.
    #[serde(rename = "dDelta")]
    DDelta,
    /// Absolute Rabi frequency in rad/us, detuning re-solved per point.
    #[serde(rename = "omega_abs")]
    OmegaAbs,
    /// Relative distance deviation `dr / r`.
    #[serde(rename = "dr")]
    Dr,
}

impl ScanAxis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dOmega" | "domega" => Ok(ScanAxis::DOmega),
            "dDelta" | "ddelta" => Ok(ScanAxis::DDelta),
            "omega_abs" => Ok(ScanAxis::OmegaAbs),
            "dr" => Ok(ScanAxis::Dr),
            _ => Err(Error::InvalidParameter(format!("unknown scan axis `{s}`"))),
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = match self {
            ScanAxis::OmegaAbs => (mhz(0.5) * (1.0 - 1e-9)..=mhz(30.0) * (1.0 + 1e-9)).contains(&v),
            _ => v.abs() <= 0.1 + 1e-12,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{self} value {v} outside the supported range"
            )))
        }
    }
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanAxis::DOmega => "dOmega",
            ScanAxis::DDelta => "dDelta",
            ScanAxis::OmegaAbs => "omega_abs",
            ScanAxis::Dr => "dr",
        })
    }
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub value: f64,
    pub fidelity: f64,
    pub rabi: f64,
    pub detuning: f64,
    pub physicality: PhysicalityReport,
}

/// Gate fidelity curves over one axis, one curve per labelled setup.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis: ScanAxis,
    pub values: Vec<f64>,
    pub labels: Vec<String>,
    /// `points[curve][k]` belongs to `values[k]`.
    pub points: Vec<Vec<ScanPoint>>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    pub fn fidelities(&self, curve: usize) -> Vec<f64> {
        self.points[curve].iter().map(|p| p.fidelity).collect()
    }

    pub fn curve(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn run_point(
    setup: &GateSetup,
    axis: ScanAxis,
    value: f64,
    opts: &RunOptions,
) -> Result<ScanPoint> {
    let (setup, dev) = match axis {
        ScanAxis::OmegaAbs => (setup.with_rabi(value)?, Deviations::default()),
        ScanAxis::DOmega => (
            setup.clone(),
            Deviations {
                d_omega: value,
                ..Default::default()
            },
        ),
        ScanAxis::DDelta => (
            setup.clone(),
            Deviations {
                d_delta: value,
                ..Default::default()
            },
        ),
        ScanAxis::Dr => (
            setup.clone(),
            Deviations {
                d_r: value,
                ..Default::default()
            },
        ),
    };
    let res = gate_fidelity(
        &setup,
        &GateSpec::new(&setup, std::f64::consts::PI).with_deviations(dev),
        opts,
    )?;
    if !(res.fidelity >= 0.0 && res.fidelity <= 1.0 + 1e-9) {
        return Err(Error::Physicality {
            t: res.gate_time,
            what: format!("fidelity {} outside [0, 1]", res.fidelity),
        });
    }
    Ok(ScanPoint {
        value,
        fidelity: res.fidelity,
        rabi: res.drive.rabi,
        detuning: res.drive.detuning,
        physicality: res.physicality,
    })
}

/// CZ fidelity of every setup at every axis value. Points are evaluated in
/// parallel on the current rayon pool; the result order follows the inputs.
pub fn robustness_scan(
    axis: ScanAxis,
    setups: &[(String, GateSetup)],
    values: &[f64],
    opts: &RunOptions,
) -> Result<SweepResult> {
    for &v in values {
        axis.check(v)?;
    }
    let jobs: Vec<(usize, usize)> = (0..setups.len())
        .flat_map(|c| (0..values.len()).map(move |k| (c, k)))
        .collect();
    let done: Vec<Result<ScanPoint>> = jobs
        .par_iter()
        .map(|&(c, k)| run_point(&setups[c].1, axis, values[k], opts))
        .collect();
    let mut points: Vec<Vec<ScanPoint>> = vec![Vec::with_capacity(values.len()); setups.len()];
    for ((c, _), r) in jobs.into_iter().zip(done) {
        points[c].push(r?);
    }
    let mut metadata = BTreeMap::new();
    metadata.insert("axis".to_string(), axis.to_string());
    metadata.insert(
        "steps_per_period".to_string(),
        opts.steps_per_period.to_string(),
    );
    for (label, s) in setups {
        metadata.insert(
            format!("{label}.setup"),
            format!(
                "model={:?} condition={:?} rabi={} detuning={} distance={} c3={} c6={:?}",
                s.model,
                s.condition,
                s.drive.rabi,
                s.drive.detuning,
                s.inter.distance,
                s.inter.c3,
                s.inter.c6
            ),
        );
    }
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        labels: setups.iter().map(|s| s.0.clone()).collect(),
        points,
        metadata,
    })
}

/// 16 log-spaced Rabi frequencies over `2 pi x [0.5, 30]` MHz, rad/us.
pub fn default_rabi_values() -> Vec<f64> {
    (0..16)
        .map(|k| mhz(0.5 * 60f64.powf(k as f64 / 15.0)))
        .collect()
}

/// Default relative distance deviations: 13 points over `+-3e-4`.
pub fn default_dr_values() -> Vec<f64> {
    (-6..=6).map(|k| k as f64 * 5e-5).collect()
}

/// Total length of the parameter set where `f > threshold`, with crossings
/// located by linear interpolation between neighbouring points.
pub fn fidelity_window(values: &[f64], fids: &[f64], threshold: f64) -> f64 {
    let mut width = 0.0;
    for k in 1..values.len().min(fids.len()) {
        let (x0, x1, f0, f1) = (values[k - 1], values[k], fids[k - 1], fids[k]);
        match (f0 > threshold, f1 > threshold) {
            (true, true) => width += x1 - x0,
            (true, false) => width += (x1 - x0) * (f0 - threshold) / (f0 - f1),
            (false, true) => width += (x1 - x0) * (f1 - threshold) / (f1 - f0),
            (false, false) => {}
        }
    }
    width
}

/// `V_d / V_vdW` in the strong-dipole comparison.
pub const WEAK_VDW_FACTOR: f64 = 2.0;

/// Model pairs compared under distance fluctuations.
#[derive(Debug, Clone)]
pub struct DistanceCases {
    /// Equal interaction strengths at equal distance, `Delta = 10 Omega` in both.
    pub equal_strength: (GateSetup, GateSetup),
    /// Shared Rabi frequency, van der Waals shift `V_d / WEAK_VDW_FACTOR`.
    pub strong_dipole: (GateSetup, GateSetup),
}

/// Builds the two comparisons around the dipole operating point
/// `Omega = 2 pi x 6.663 MHz`, `r = 3 um`.
pub fn distance_cases() -> Result<DistanceCases> {
    let p = crate::model::Preset::named("forster-ravets")?;
    let vp = crate::model::Preset::named("vdw-reference")?;
    let dd = GateSetup::solved(
        GateModel::DdForster,
        RabCondition::ForsterFull,
        mhz(6.663),
        p.interaction(),
        p.rates()?,
    )?;
    let v_d = dd.inter.v_d()?;
    let r = dd.inter.distance;
    // C6 in GHz um^6 giving strength v (rad/us) at distance r
    let c6_for = |v: f64| v / mhz(1.0) / 1000.0 * r.powi(6);

    let (a, b) = (2.0, 2.0 / 3.0);
    let k = 10.0;
    let omega_v = v_d / (a * k - b / k);
    let vdw_equal = GateSetup::solved(
        GateModel::VdwReference,
        RabCondition::VdwRef,
        omega_v,
        InteractionParams::vdw(c6_for(v_d), r),
        vp.rates()?,
    )?;
    let v_weak = v_d / WEAK_VDW_FACTOR;
    let vdw_weak = GateSetup::solved(
        GateModel::VdwReference,
        RabCondition::VdwRef,
        dd.drive.rabi,
        InteractionParams::vdw(c6_for(v_weak), r),
        vp.rates()?,
    )?;
    Ok(DistanceCases {
        equal_strength: (dd.clone(), vdw_equal),
        strong_dipole: (dd, vdw_weak),
    })
}
