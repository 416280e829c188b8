//! Run configuration: a TOML file with explicit units on every physical
//! quantity, resolved against an embedded preset.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use ddrab::model::{
    solve_rab_detuning, DecayRates, DriveParams, InteractionParams, Preset, RabCondition, SchemeId,
};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `<number> <unit>` parsed from a string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<K> {
    pub value: f64,
    pub kind: K,
}

pub trait UnitKind: Sized + Copy {
    const WHAT: &'static str;
    fn parse_unit(u: &str) -> Option<(f64, Self)>;
}

/// Frequencies: ordinary (scaled to MHz) or angular (rad/us).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqKind {
    Ordinary,
    Angular,
}

impl UnitKind for FreqKind {
    const WHAT: &'static str = "frequency (Hz, kHz, MHz, GHz, rad/us)";
    fn parse_unit(u: &str) -> Option<(f64, Self)> {
        Some(match u {
            "Hz" => (1e-6, FreqKind::Ordinary),
            "kHz" => (1e-3, FreqKind::Ordinary),
            "MHz" => (1.0, FreqKind::Ordinary),
            "GHz" => (1e3, FreqKind::Ordinary),
            "rad/us" | "rad/μs" => (1.0, FreqKind::Angular),
            _ => return None,
        })
    }
}

macro_rules! scaled_unit {
    ($name:ident, $what:expr, { $($u:pat => $s:expr),* $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub struct $name;
        impl UnitKind for $name {
            const WHAT: &'static str = $what;
            fn parse_unit(u: &str) -> Option<(f64, Self)> {
                match u { $($u => Some(($s, $name)),)* _ => None }
            }
        }
    };
}

scaled_unit!(Length, "length (nm, um, mm)", { "nm" => 1e-3, "um" | "μm" => 1.0, "mm" => 1e3 });
scaled_unit!(Time, "time (ns, us, ms, s)", { "ns" => 1e-3, "us" | "μs" => 1.0, "ms" => 1e3, "s" => 1e6 });
scaled_unit!(Angle, "angle (rad, deg, pi)", { "rad" => 1.0, "deg" => PI / 180.0, "pi" => PI });
scaled_unit!(C3Unit, "C3 coefficient (GHz um^3, MHz um^3)", { "GHz um^3" | "GHz*um^3" => 1.0, "MHz um^3" | "MHz*um^3" => 1e-3 });
scaled_unit!(C6Unit, "C6 coefficient (GHz um^6, MHz um^6)", { "GHz um^6" | "GHz*um^6" => 1.0, "MHz um^6" | "MHz*um^6" => 1e-3 });

fn parse_quantity<K: UnitKind>(s: &str) -> Result<Quantity<K>, String> {
    let s = s.trim();
    let split = s
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| format!("`{s}` has no unit; expected {}", K::WHAT))?;
    let (num, unit) = s.split_at(split);
    let unit = unit.split_whitespace().collect::<Vec<_>>().join(" ");
    let value: f64 = num
        .parse()
        .map_err(|_| format!("`{num}` is not a number"))?;
    let (scale, kind) = K::parse_unit(&unit)
        .ok_or_else(|| format!("unknown unit `{unit}`; expected {}", K::WHAT))?;
    Ok(Quantity {
        value: value * scale,
        kind,
    })
}

impl<'de, K: UnitKind> Deserialize<'de> for Quantity<K> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<K>(std::marker::PhantomData<K>);
        impl<K: UnitKind> de::Visitor<'_> for V<K> {
            type Value = Quantity<K>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a string `<number> <unit>` with a {} unit", K::WHAT)
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Self::Value, E> {
                parse_quantity(s).map_err(E::custom)
            }
        }
        d.deserialize_str(V(std::marker::PhantomData))
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub rabi: Option<Quantity<FreqKind>>,
    /// Solved from `condition` when absent.
    pub detuning: Option<Quantity<FreqKind>>,
    pub condition: Option<String>,
    pub bichromatic: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSection {
    pub c3: Option<Quantity<C3Unit>>,
    pub c6: Option<Quantity<C6Unit>>,
    pub distance: Option<Quantity<Length>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub steps_per_period: Option<f64>,
    pub min_steps: Option<usize>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSection {
    pub trace: Option<f64>,
    pub hermiticity: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub norm: Option<f64>,
    /// Closed-form deviation bound of `effective-check`, relative to `Omega^2 / Delta`.
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub t_end: Option<Quantity<Time>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub theta: Option<Quantity<Angle>>,
    pub propagation: Option<String>,
    #[serde(default = "default_true")]
    pub dissipation: bool,
    #[serde(default)]
    pub d_omega: f64,
    #[serde(default)]
    pub d_delta: f64,
    #[serde(default)]
    pub d_r: f64,
}

impl Default for GateSection {
    fn default() -> Self {
        GateSection {
            theta: None,
            propagation: None,
            dissipation: true,
            d_omega: 0.0,
            d_delta: 0.0,
            d_r: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSection {
    pub thetas: Option<Vec<Quantity<Angle>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub axis: Option<String>,
    /// `reference`, `equal-strength`, `strong-dipole` or `config`.
    pub curves: Option<String>,
    /// Relative deviations; only for the deviation axes.
    pub values: Option<Vec<f64>>,
    /// Rabi frequencies; only for `omega_abs`.
    pub rabi: Option<Vec<Quantity<FreqKind>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    pub rabi: Option<Quantity<FreqKind>>,
    pub ratios: Option<Vec<f64>>,
    pub full_check: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverSection {
    pub defects: Option<Vec<Quantity<FreqKind>>>,
}

/// Top level of a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    /// Scheme id when no preset is used.
    pub scheme: Option<String>,
    /// Ordinary frequencies are multiplied by `2 pi`.
    pub x2pi: Option<bool>,
    pub out_dir: Option<String>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub interaction: InteractionSection,
    /// Lifetime per Rydberg level.
    #[serde(default)]
    pub decay: BTreeMap<String, Quantity<Time>>,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub tolerances: TolerancesSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub gate: GateSection,
    #[serde(default)]
    pub geometric: GeometricSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub steady: SteadySection,
    #[serde(default)]
    pub crossover: CrossoverSection,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, col)
}

impl RunConfig {
    pub fn parse(src: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => {
                    let (l, c) = line_col(src, span.start);
                    CliError::Config(format!("{origin}:{l}:{c}: {msg}"))
                }
                None => CliError::Config(format!("{origin}: {msg}")),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn x2pi(&self) -> bool {
        self.x2pi.unwrap_or(true)
    }

    /// Frequency in rad/us.
    pub fn angular(&self, q: &Quantity<FreqKind>) -> f64 {
        match q.kind {
            FreqKind::Angular => q.value,
            FreqKind::Ordinary if self.x2pi() => 2.0 * PI * q.value,
            FreqKind::Ordinary => q.value,
        }
    }

    /// Coupling coefficient as the library expects it, an ordinary frequency times `r^n`.
    fn coefficient(&self, v: f64) -> f64 {
        if self.x2pi() {
            v
        } else {
            v / (2.0 * PI)
        }
    }

    /// Preset overlaid with every explicit setting of the file.
    pub fn resolve(&self) -> Result<ResolvedModel, CliError> {
        let cfg = |s: String| CliError::Config(s);
        let base = match (&self.preset, &self.scheme) {
            (Some(_), Some(_)) => {
                return Err(cfg("give either `preset` or `scheme`, not both".into()))
            }
            (Some(p), None) => Some(Preset::named(p).map_err(|e| cfg(e.to_string()))?),
            (None, Some(_)) => None,
            (None, None) => Some(Preset::named("forster-ravets").unwrap()),
        };
        let scheme = match (&base, &self.scheme) {
            (Some(p), _) => p.scheme,
            (None, Some(s)) => SchemeId::parse(s).map_err(|e| cfg(e.to_string()))?,
            (None, None) => unreachable!(),
        };
        let condition = match (&self.drive.condition, &base) {
            (Some(c), _) => RabCondition::parse(c).map_err(|e| cfg(e.to_string()))?,
            (None, Some(p)) => p.condition,
            (None, None) => default_condition(scheme),
        };
        let need = |what: &str| cfg(format!("`{what}` is required without a preset"));

        let rabi = match (&self.drive.rabi, &base) {
            (Some(q), _) => self.angular(q),
            (None, Some(p)) => ddrab::model::mhz(p.rabi_mhz),
            (None, None) => return Err(need("drive.rabi")),
        };
        let c3 = match (&self.interaction.c3, &base) {
            (Some(q), _) => self.coefficient(q.value),
            (None, Some(p)) => p.c3_ghz_um3,
            (None, None) => 0.0,
        };
        let c6 = match (&self.interaction.c6, &base) {
            (Some(q), _) => Some(self.coefficient(q.value)),
            (None, Some(p)) => p.c6_ghz_um6,
            (None, None) => None,
        };
        let distance = match (&self.interaction.distance, &base) {
            (Some(q), _) => q.value,
            (None, Some(p)) => p.distance_um,
            (None, None) => return Err(need("interaction.distance")),
        };
        let inter = InteractionParams { c3, c6, distance };

        let mut lifetimes: BTreeMap<String, f64> = base
            .as_ref()
            .map(|p| p.lifetimes_ms.iter().cloned().collect())
            .unwrap_or_default();
        for (level, q) in &self.decay {
            lifetimes.insert(level.clone(), q.value / 1e3);
        }
        let lt: Vec<(&str, f64)> = lifetimes.iter().map(|(l, t)| (l.as_str(), *t)).collect();
        let rates = DecayRates::from_lifetimes_ms(&lt).map_err(|e| cfg(e.to_string()))?;

        let v =
            ddrab::model::interaction_strength(scheme, &inter).map_err(|e| cfg(e.to_string()))?;
        let detuning = match &self.drive.detuning {
            Some(q) => self.angular(q),
            None => solve_rab_detuning(condition, v, rabi).map_err(|e| cfg(e.to_string()))?,
        };
        let drive = DriveParams {
            rabi,
            detuning,
            bichromatic: self
                .drive
                .bichromatic
                .or(base.as_ref().map(|p| p.bichromatic))
                .unwrap_or(true),
            phase: 0.0,
        };
        drive.validate().map_err(|e| cfg(e.to_string()))?;
        Ok(ResolvedModel {
            preset: base.map(|p| p.name),
            scheme,
            condition,
            drive,
            inter,
            rates,
        })
    }
}

fn default_condition(s: SchemeId) -> RabCondition {
    match s {
        SchemeId::Forster => RabCondition::ForsterFull,
        SchemeId::SpinExchange | SchemeId::CollectiveExchange => RabCondition::ExchangeFull,
        SchemeId::VdwReference => RabCondition::VdwRef,
    }
}

/// Model parameters after defaults and overrides, in library units.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedModel {
    pub preset: Option<String>,
    pub scheme: SchemeId,
    pub condition: RabCondition,
    pub drive: DriveParams,
    pub inter: InteractionParams,
    pub rates: DecayRates,
}

/// A preset written back in config syntax.
pub fn preset_toml(p: &Preset) -> String {
    let mut s = String::new();
    s.push_str(&format!("preset = \"{}\"\n", p.name));
    s.push_str("x2pi = true\n\n[drive]\n");
    s.push_str(&format!("rabi = \"{} MHz\"\n", p.rabi_mhz));
    s.push_str(&format!(
        "condition = \"{}\"\n",
        condition_name(p.condition)
    ));
    s.push_str(&format!(
        "bichromatic = {}\n\n[interaction]\n",
        p.bichromatic
    ));
    if p.c3_ghz_um3 != 0.0 {
        s.push_str(&format!("c3 = \"{} GHz um^3\"\n", p.c3_ghz_um3));
    }
    if let Some(c6) = p.c6_ghz_um6 {
        s.push_str(&format!("c6 = \"{c6} GHz um^6\"\n"));
    }
    s.push_str(&format!("distance = \"{} um\"\n\n[decay]\n", p.distance_um));
    for (l, t) in &p.lifetimes_ms {
        let key = if l.chars().all(|c| c.is_ascii_alphanumeric()) {
            l.clone()
        } else {
            format!("\"{l}\"")
        };
        s.push_str(&format!("{key} = \"{t} ms\"\n"));
    }
    s
}

pub fn condition_name(c: RabCondition) -> &'static str {
    match c {
        RabCondition::ForsterFull => "FORSTER_FULL",
        RabCondition::ForsterNostark => "FORSTER_NOSTARK",
        RabCondition::ExchangeFull => "EXCHANGE_FULL",
        RabCondition::VdwRef => "VDW_REF",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_convert() {
        let q: Quantity<FreqKind> = parse_quantity("2.5 GHz").unwrap();
        assert_eq!((q.value, q.kind), (2500.0, FreqKind::Ordinary));
        let t: Quantity<Time> = parse_quantity("0.53 ms").unwrap();
        assert!((t.value - 530.0).abs() < 1e-12);
        let a: Quantity<Angle> = parse_quantity("0.5 pi").unwrap();
        assert!((a.value - PI / 2.0).abs() < 1e-15);
        let c: Quantity<C3Unit> = parse_quantity("2540  MHz   um^3").unwrap();
        assert!((c.value - 2.54).abs() < 1e-12);
        assert!(parse_quantity::<Length>("3").is_err());
        assert!(parse_quantity::<Length>("3 furlong").is_err());
    }

    #[test]
    fn bad_unit_reports_position() {
        let src = "preset = \"forster-ravets\"\n[drive]\nrabi = \"5 MHzz\"\n";
        match RunConfig::parse(src, "f.toml") {
            Err(CliError::Config(m)) => assert!(m.starts_with("f.toml:3:8:"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[drive]\nrabbi = \"5 MHz\"\n", "f").is_err());
        assert!(RunConfig::parse("colour = 3\n", "f").is_err());
    }

    #[test]
    fn preset_dump_round_trips() {
        for p in Preset::all() {
            let cfg = RunConfig::parse(&preset_toml(&p), "dump").unwrap();
            let r = cfg.resolve().unwrap();
            let want = p.drive().unwrap();
            assert!(
                (r.drive.detuning - want.detuning).abs() < 1e-9 * want.detuning,
                "{}",
                p.name
            );
            assert_eq!(r.rates, p.rates().unwrap());
        }
    }

    #[test]
    fn angular_without_x2pi() {
        let cfg = RunConfig::parse("x2pi = false\n[drive]\nrabi = \"31.4 MHz\"\n", "f").unwrap();
        assert!((cfg.resolve().unwrap().drive.rabi - 31.4).abs() < 1e-12);
    }
}
