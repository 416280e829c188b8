use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{c, check_same, Basis, Operator, C64};
use crate::error::Result;

/// One `a * e^{i nu t}` component of a drive envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub amplitude: C64,
    /// Angular frequency in rad/us; either sign.
    pub freq: f64,
}

/// `f(t) A + conj(f(t)) A^dag` with `f(t) = sum_k a_k e^{i nu_k t}`.
#[derive(Debug, Clone)]
pub struct DriveTerm {
    pub op: Operator,
    pub tones: Vec<Tone>,
}

impl DriveTerm {
    pub fn envelope(&self, t: f64) -> C64 {
        self.tones
            .iter()
            .map(|tn| tn.amplitude * C64::from_polar(1.0, tn.freq * t))
            .sum()
    }
}

/// Hamiltonian with a static part and a finite sum of harmonic drive terms,
/// `H(t) = H0 + sum_j [f_j(t) A_j + h.c.]`.
#[derive(Debug, Clone)]
pub struct DrivenHamiltonian {
    pub static_part: Operator,
    pub terms: Vec<DriveTerm>,
}

impl DrivenHamiltonian {
    pub fn new(static_part: Operator) -> Self {
        DrivenHamiltonian {
            static_part,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, op: Operator, tones: Vec<Tone>) -> Result<Self> {
        check_same(self.static_part.basis(), op.basis())?;
        self.terms.push(DriveTerm { op, tones });
        Ok(self)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        self.static_part.basis()
    }

    pub fn dim(&self) -> usize {
        self.static_part.dim()
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut h = self.static_part.clone();
        for term in &self.terms {
            let f = term.envelope(t);
            let d = h.dim();
            for i in 0..d {
                for j in 0..d {
                    let a = term.op[(i, j)];
                    if a != c(0.0, 0.0) {
                        h[(i, j)] += f * a;
                        h[(j, i)] += f.conj() * a.conj();
                    }
                }
            }
        }
        h
    }

    /// Multiplies every drive amplitude by `factor`.
    pub fn scale_drive(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for term in &mut out.terms {
            for tn in &mut term.tones {
                tn.amplitude *= factor;
            }
        }
        out
    }

    /// Bound on the fastest dynamical frequency: largest tone frequency plus
    /// the spectral radius of the static part and the drive strength.
    pub fn max_frequency(&self) -> f64 {
        let mut w = self.static_part.hermitian_norm();
        let mut nu: f64 = 0.0;
        for term in &self.terms {
            let amp: f64 = term.tones.iter().map(|tn| tn.amplitude.norm()).sum();
            w += 2.0 * amp * term.op.norm2();
            for tn in &term.tones {
                nu = nu.max(tn.freq.abs());
            }
        }
        w + nu
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| {
            t.tones
                .iter()
                .all(|tn| tn.freq == 0.0 || tn.amplitude == c(0.0, 0.0))
        })
    }
}
