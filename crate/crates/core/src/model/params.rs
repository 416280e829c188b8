use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts an ordinary frequency in MHz to rad/us.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Laser drive. Angular frequencies in rad/us.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub rabi: f64,
    pub detuning: f64,
    pub bichromatic: bool,
    #[serde(default)]
    pub phase: f64,
}

impl DriveParams {
    pub fn new(rabi: f64, detuning: f64) -> Self {
        DriveParams {
            rabi,
            detuning,
            bichromatic: true,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi > 0.0 && self.rabi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rabi frequency must be positive, got {}",
                self.rabi
            )));
        }
        if !(self.detuning > 0.0 && self.detuning.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "detuning must be positive, got {}",
                self.detuning
            )));
        }
        Ok(())
    }

    /// Duration of one full effective cycle, `2 pi Delta / Omega^2`.
    pub fn gate_time(&self) -> f64 {
        2.0 * PI * self.detuning / (self.rabi * self.rabi)
    }
}

fn check_distance(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "interatomic distance must be positive, got {r}"
        )))
    }
}

/// `C3 / r^3` for `c3` in GHz um^3 and `r` in um, returned in rad/us.
pub fn dd_strength(c3: f64, r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(mhz(c3 * 1000.0 / r.powi(3)))
}

/// `C6 / r^6` for `c6` in GHz um^6 and `r` in um, returned in rad/us.
pub fn vdw_strength(c6: f64, r: f64) -> Result<f64> {
    check_distance(r)?;
    Ok(mhz(c6 * 1000.0 / r.powi(6)))
}

/// Distance below which the resonant dipole-dipole shift exceeds the van der
/// Waals shift, `(4 C3^2 / delta^2)^(1/6)`. Units are whatever makes
/// `C3 / r^3` commensurate with `delta`.
pub fn crossover_distance(c3: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ZeroDefect);
    }
    Ok((4.0 * c3 * c3 / (delta * delta)).powf(1.0 / 6.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    /// GHz um^3
    pub c3: f64,
    /// GHz um^6
    #[serde(default)]
    pub c6: Option<f64>,
    /// um
    pub distance: f64,
}

impl InteractionParams {
    pub fn dipole(c3: f64, distance: f64) -> Self {
        InteractionParams {
            c3,
            c6: None,
            distance,
        }
    }

    pub fn vdw(c6: f64, distance: f64) -> Self {
        InteractionParams {
            c3: 0.0,
            c6: Some(c6),
            distance,
        }
    }

    pub fn v_d(&self) -> Result<f64> {
        dd_strength(self.c3, self.distance)
    }

    pub fn v_vdw(&self) -> Result<f64> {
        vdw_strength(self.c6.unwrap_or(0.0), self.distance)
    }

    pub fn with_distance(&self, distance: f64) -> Self {
        InteractionParams { distance, ..*self }
    }
}

/// Decay rate per Rydberg level in 1/us.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    pub rates: BTreeMap<String, f64>,
}

impl DecayRates {
    pub fn none() -> Self {
        DecayRates::default()
    }

    /// Rates `1/tau` from lifetimes given in ms.
    pub fn from_lifetimes_ms(lifetimes: &[(&str, f64)]) -> Result<Self> {
        let mut rates = BTreeMap::new();
        for &(l, tau) in lifetimes {
            if !(tau > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lifetime of `{l}` must be positive"
                )));
            }
            rates.insert(l.to_string(), 1.0 / (tau * 1000.0));
        }
        Ok(DecayRates { rates })
    }

    pub fn get(&self, level: &str) -> Option<f64> {
        self.rates.get(level).copied()
    }

    pub fn set(&mut self, level: &str, gamma: f64) {
        self.rates.insert(level.to_string(), gamma);
    }

    /// Same levels with every rate set to zero.
    pub fn zeroed(&self) -> Self {
        DecayRates {
            rates: self.rates.keys().map(|k| (k.clone(), 0.0)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rates.values().all(|&g| g == 0.0)
    }
}

/// Antiblockade resonance condition tying `V`, `Delta` and `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RabCondition {
    ForsterFull,
    ForsterNostark,
    ExchangeFull,
    VdwRef,
}

impl RabCondition {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "FORSTER_FULL" => Ok(RabCondition::ForsterFull),
            "FORSTER_NOSTARK" => Ok(RabCondition::ForsterNostark),
            "EXCHANGE_FULL" => Ok(RabCondition::ExchangeFull),
            "VDW_REF" => Ok(RabCondition::VdwRef),
            _ => Err(Error::InvalidParameter(format!(
                "unknown antiblockade condition `{s}`"
            ))),
        }
    }

    // residual = a Delta - b Omega^2 / Delta - V
    fn coeffs(self) -> (f64, f64) {
        match self {
            RabCondition::ForsterFull => (SQRT_2, 1.0 / (3.0 * SQRT_2)),
            RabCondition::ForsterNostark => (SQRT_2, 0.0),
            RabCondition::ExchangeFull => (2.0, 1.0 / 3.0),
            RabCondition::VdwRef => (2.0, 2.0 / 3.0),
        }
    }

    pub fn residual(self, v: f64, delta: f64, omega: f64) -> f64 {
        let (a, b) = self.coeffs();
        a * delta - b * omega * omega / delta - v
    }

    /// Interaction strength that satisfies the condition at `(delta, omega)`.
    pub fn required_v(self, delta: f64, omega: f64) -> f64 {
        self.residual(0.0, delta, omega)
    }
}

/// Positive detuning root of the condition, continuous with the `Omega -> 0` limit.
pub fn solve_rab_detuning(cond: RabCondition, v: f64, omega: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) || !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::NoPositiveRoot { v, omega });
    }
    let (a, b) = cond.coeffs();
    // a D^2 - v D - b W^2 = 0; the '+' root is the one that tends to v/a.
    let disc = v * v + 4.0 * a * b * omega * omega;
    let mut d = (v + disc.sqrt()) / (2.0 * a);
    if !(d > 0.0) {
        return Err(Error::NoPositiveRoot { v, omega });
    }
    for _ in 0..2 {
        let f = cond.residual(v, d, omega);
        let fp = a + b * omega * omega / (d * d);
        d -= f / fp;
    }
    Ok(d)
}

/// `dDelta/dV` along the operating ray of fixed `Delta/Omega`, i.e. the
/// detuning correction needed when `V` drifts and the drive is retuned at
/// a fixed detuning-to-Rabi ratio.
pub fn condition_sensitivity(cond: RabCondition, omega: f64, delta: f64) -> Result<f64> {
    if !(omega > 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(
            "sensitivity needs positive omega and delta".into(),
        ));
    }
    let (a, b) = cond.coeffs();
    let k = delta / omega;
    let dv = a - b / (k * k);
    if dv.abs() < 1e-12 * a {
        return Err(Error::SingularSensitivity);
    }
    Ok(1.0 / dv)
}

/// `r_vdW / r_d` at which an equal distance jitter needs the same detuning
/// correction in the van der Waals and Forster models, given `V_vdW = V_d`.
/// `dV/V` is `-6 dr/r` for the former and `-3 dr/r` for the latter.
pub fn balanced_distance_ratio(omega: f64, delta: f64) -> Result<f64> {
    let sv = condition_sensitivity(RabCondition::VdwRef, omega, delta)?;
    let sd = condition_sensitivity(RabCondition::ForsterFull, omega, delta)?;
    Ok(2.0 * sv / sd)
}

/// `dDelta/dV` of the solved detuning at fixed `Omega`.
pub fn condition_sensitivity_fixed_rabi(cond: RabCondition, omega: f64, delta: f64) -> Result<f64> {
    if !(omega >= 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(
            "sensitivity needs positive delta".into(),
        ));
    }
    let (a, b) = cond.coeffs();
    let dv = a + b * omega * omega / (delta * delta);
    if dv.abs() < 1e-12 * a {
        return Err(Error::SingularSensitivity);
    }
    Ok(1.0 / dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strengths() {
        let v = dd_strength(2.54, 3.0).unwrap();
        assert!((v / mhz(1.0) - 94.074).abs() < 1e-3);
        assert!((dd_strength(2.54, 6.0).unwrap() - v / 8.0).abs() < 1e-12 * v);
        assert!((dd_strength(7.965, 3.0).unwrap() / mhz(1.0) - 295.0).abs() < 1e-9);
        let w = vdw_strength(1700.0, 6.6).unwrap();
        assert!((w / mhz(1.0) - 20.57).abs() < 5e-3);
        assert!((vdw_strength(1700.0, 13.2).unwrap() - w / 64.0).abs() < 1e-12 * w);
        assert_eq!(vdw_strength(0.0, 2.0).unwrap(), 0.0);
        assert!(dd_strength(1.0, 0.0).is_err());
        assert!(vdw_strength(1.0, -1.0).is_err());
    }

    #[test]
    fn crossover() {
        assert!((crossover_distance(3.0, 6.0).unwrap() - 1.0).abs() < 1e-15);
        let r1 = crossover_distance(2.0, 0.7).unwrap();
        let r2 = crossover_distance(2.0, 1.4).unwrap();
        assert!((r1 / r2 - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert_eq!(crossover_distance(2.0, 0.0), Err(Error::ZeroDefect));
    }

    #[test]
    fn zero_rabi_limits() {
        let v = 3.7;
        assert!(
            (solve_rab_detuning(RabCondition::ForsterFull, v, 0.0).unwrap() - v / SQRT_2).abs()
                < 1e-15
        );
        assert!(
            (solve_rab_detuning(RabCondition::ExchangeFull, v, 0.0).unwrap() - v / 2.0).abs()
                < 1e-15
        );
        assert!(solve_rab_detuning(RabCondition::ExchangeFull, -1.0, 1.0).is_err());
    }

    #[test]
    fn forster_root_against_bisection() {
        let v = dd_strength(2.54, 3.0).unwrap();
        let w = mhz(5.0);
        let d = solve_rab_detuning(RabCondition::ForsterFull, v, w).unwrap();
        let (mut lo, mut hi) = (v / 2.0, v);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if RabCondition::ForsterFull.residual(v, mid, w) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((d - 0.5 * (lo + hi)).abs() < 1e-12 * v);
        assert!(RabCondition::ForsterFull.residual(v, d, w).abs() < 1e-12 * v);
    }

    #[test]
    fn lifetimes_to_rates() {
        let r = DecayRates::from_lifetimes_ms(&[("p", 0.53), ("d", 0.22), ("f", 0.13)]).unwrap();
        // 1/tau expressed in kHz
        assert!((r.get("p").unwrap() * 1e3 - 1.89).abs() < 5e-3);
        assert!((r.get("d").unwrap() * 1e3 - 4.55).abs() < 5e-3);
        assert!((r.get("f").unwrap() * 1e3 - 7.69).abs() < 5e-3);
    }
}
