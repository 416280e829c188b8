use serde::{Deserialize, Serialize};

use super::params::{
    mhz, solve_rab_detuning, DecayRates, DriveParams, InteractionParams, RabCondition,
};
use super::scheme::{SchemeId, SchemeSpec};
use crate::error::{Error, Result};

/// Named parameter set for one of the built-in models. Frequencies in MHz
/// (ordinary, not angular), lengths in um, lifetimes in ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub scheme: SchemeId,
    pub condition: RabCondition,
    pub rabi_mhz: f64,
    pub c3_ghz_um3: f64,
    pub c6_ghz_um6: Option<f64>,
    pub distance_um: f64,
    pub lifetimes_ms: Vec<(String, f64)>,
    pub bichromatic: bool,
}

pub const PRESET_NAMES: [&str; 4] = [
    "forster-ravets",
    "spin-exchange-barredo",
    "collective-gorniaczyk",
    "vdw-reference",
];

fn lt(v: &[(&str, f64)]) -> Vec<(String, f64)> {
    v.iter().map(|&(l, t)| (l.to_string(), t)).collect()
}

impl Preset {
    pub fn named(name: &str) -> Result<Self> {
        let p = match name {
            "forster-ravets" => Preset {
                name: name.into(),
                scheme: SchemeId::Forster,
                condition: RabCondition::ForsterFull,
                rabi_mhz: 5.0,
                c3_ghz_um3: 2.54,
                c6_ghz_um6: None,
                distance_um: 3.0,
                lifetimes_ms: lt(&[("p", 0.53), ("d", 0.22), ("f", 0.13)]),
                bichromatic: true,
            },
            "spin-exchange-barredo" => Preset {
                name: name.into(),
                scheme: SchemeId::SpinExchange,
                condition: RabCondition::ExchangeFull,
                rabi_mhz: 5.0,
                c3_ghz_um3: 7.965,
                c6_ghz_um6: None,
                distance_um: 3.0,
                lifetimes_ms: lt(&[("p", 0.59), ("d", 0.25)]),
                bichromatic: true,
            },
            "collective-gorniaczyk" => Preset {
                name: name.into(),
                scheme: SchemeId::CollectiveExchange,
                condition: RabCondition::ExchangeFull,
                rabi_mhz: 5.0,
                c3_ghz_um3: 0.6,
                c6_ghz_um6: None,
                distance_um: 2.0,
                lifetimes_ms: lt(&[("s", 0.12), ("s'", 0.13), ("p", 0.25), ("p'", 0.27)]),
                bichromatic: true,
            },
            "vdw-reference" => Preset {
                name: name.into(),
                scheme: SchemeId::VdwReference,
                condition: RabCondition::VdwRef,
                rabi_mhz: 2.2,
                c3_ghz_um3: 0.0,
                c6_ghz_um6: Some(1700.0),
                distance_um: 6.6,
                lifetimes_ms: lt(&[("d", 0.22)]),
                bichromatic: true,
            },
            _ => return Err(Error::InvalidParameter(format!("unknown preset `{name}`"))),
        };
        Ok(p)
    }

    pub fn all() -> Vec<Preset> {
        PRESET_NAMES
            .iter()
            .map(|n| Preset::named(n).unwrap())
            .collect()
    }

    pub fn spec(&self) -> SchemeSpec {
        SchemeSpec::new(self.scheme)
    }

    pub fn interaction(&self) -> InteractionParams {
        InteractionParams {
            c3: self.c3_ghz_um3,
            c6: self.c6_ghz_um6,
            distance: self.distance_um,
        }
    }

    pub fn rates(&self) -> Result<DecayRates> {
        let v: Vec<(&str, f64)> = self
            .lifetimes_ms
            .iter()
            .map(|(l, t)| (l.as_str(), *t))
            .collect();
        DecayRates::from_lifetimes_ms(&v)
    }

    /// Interaction strength at the preset distance, rad/us.
    pub fn coupling(&self) -> Result<f64> {
        super::interaction_strength(self.scheme, &self.interaction())
    }

    /// Drive with the detuning fixed by the preset's antiblockade condition.
    pub fn drive(&self) -> Result<DriveParams> {
        let omega = mhz(self.rabi_mhz);
        let delta = solve_rab_detuning(self.condition, self.coupling()?, omega)?;
        Ok(DriveParams {
            rabi: omega,
            detuning: delta,
            bichromatic: self.bichromatic,
            phase: 0.0,
        })
    }
}
