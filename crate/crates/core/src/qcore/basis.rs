use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered `(atom1, atom2)` level pair naming one two-atom basis vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisLabel {
    pub atom1: String,
    pub atom2: String,
}

impl BasisLabel {
    pub fn new(atom1: &str, atom2: &str) -> Self {
        BasisLabel {
            atom1: atom1.to_string(),
            atom2: atom2.to_string(),
        }
    }
}

/// Mixed-radix product basis. Each factor is one atom's ordered level list;
/// the last factor varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    factors: Vec<Vec<String>>,
    dim: usize,
}

impl Basis {
    pub fn single<S: AsRef<str>>(levels: &[S]) -> Result<Self> {
        let levels: Vec<String> = levels.iter().map(|s| s.as_ref().to_string()).collect();
        if levels.is_empty() {
            return Err(Error::InvalidBasis("empty level list".into()));
        }
        let mut seen = HashSet::new();
        for l in &levels {
            if l.is_empty() || !seen.insert(l.as_str()) {
                return Err(Error::InvalidBasis(format!(
                    "duplicate or empty level `{l}`"
                )));
            }
        }
        let dim = levels.len();
        Ok(Basis {
            factors: vec![levels],
            dim,
        })
    }

    pub fn product(a: &Basis, b: &Basis) -> Self {
        let mut factors = a.factors.clone();
        factors.extend(b.factors.iter().cloned());
        Basis {
            factors,
            dim: a.dim * b.dim,
        }
    }

    pub fn two_atom<S: AsRef<str>>(atom1: &[S], atom2: &[S]) -> Result<Self> {
        Ok(Basis::product(
            &Basis::single(atom1)?,
            &Basis::single(atom2)?,
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[Vec<String>] {
        &self.factors
    }

    /// Per-factor level indices of basis vector `i`.
    pub fn digits(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            out[k] = i % f.len();
            i /= f.len();
        }
        out
    }

    pub fn label_parts(&self, i: usize) -> Vec<&str> {
        self.digits(i)
            .iter()
            .zip(&self.factors)
            .map(|(&d, f)| f[d].as_str())
            .collect()
    }

    /// Concatenated label, e.g. `"1d"` or `"s'p'"`.
    pub fn label(&self, i: usize) -> String {
        self.label_parts(i).concat()
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim).map(|i| self.label(i)).collect()
    }

    pub fn pair(&self, i: usize) -> Option<BasisLabel> {
        if self.factors.len() != 2 {
            return None;
        }
        let p = self.label_parts(i);
        Some(BasisLabel::new(p[0], p[1]))
    }

    pub fn index_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        if labels.len() != self.factors.len() {
            return Err(Error::UnknownLevel(
                labels
                    .iter()
                    .map(|s| s.as_ref())
                    .collect::<Vec<_>>()
                    .join(","),
            ));
        }
        let mut idx = 0;
        for (l, f) in labels.iter().zip(&self.factors) {
            let d = f
                .iter()
                .position(|x| x == l.as_ref())
                .ok_or_else(|| Error::UnknownLevel(l.as_ref().to_string()))?;
            idx = idx * f.len() + d;
        }
        Ok(idx)
    }

    pub fn index_of_pair(&self, label: &BasisLabel) -> Result<usize> {
        self.index_of(&[label.atom1.as_str(), label.atom2.as_str()])
    }
}
