use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Basis, BasisLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemeId {
    Forster,
    SpinExchange,
    CollectiveExchange,
    VdwReference,
}

impl SchemeId {
    pub fn all() -> [SchemeId; 4] {
        [
            SchemeId::Forster,
            SchemeId::SpinExchange,
            SchemeId::CollectiveExchange,
            SchemeId::VdwReference,
        ]
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "FORSTER" => Ok(SchemeId::Forster),
            "SPIN_EXCHANGE" => Ok(SchemeId::SpinExchange),
            "COLLECTIVE_EXCHANGE" => Ok(SchemeId::CollectiveExchange),
            "VDW_REFERENCE" | "VDW" => Ok(SchemeId::VdwReference),
            _ => Err(Error::InvalidParameter(format!("unknown scheme id `{s}`"))),
        }
    }

    pub fn is_dipole_dipole(self) -> bool {
        self != SchemeId::VdwReference
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeId::Forster => "FORSTER",
            SchemeId::SpinExchange => "SPIN_EXCHANGE",
            SchemeId::CollectiveExchange => "COLLECTIVE_EXCHANGE",
            SchemeId::VdwReference => "VDW_REFERENCE",
        };
        f.write_str(s)
    }
}

/// Laser coupling `|ground> <-> |rydberg>` on one atom (0 or 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub atom: usize,
    pub ground: String,
    pub rydberg: String,
}

/// `prefactor * V * |ket><bra| + h.c.` (added once when `ket == bra`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub ket: BasisLabel,
    pub bra: BasisLabel,
    pub prefactor: f64,
}

/// Named normalized superposition of two-atom basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DressedDef {
    pub name: String,
    pub terms: Vec<(BasisLabel, f64)>,
}

/// Declarative description of a two-atom driven model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub id: SchemeId,
    pub atom1_levels: Vec<String>,
    pub atom2_levels: Vec<String>,
    pub drives: Vec<DriveSpec>,
    pub dd_term: Vec<Coupling>,
    pub dressed_defs: Vec<DressedDef>,
}

const GROUND: [&str; 2] = ["0", "1"];

fn levels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn drive(atom: usize, r: &str) -> DriveSpec {
    DriveSpec {
        atom,
        ground: "1".into(),
        rydberg: r.into(),
    }
}

fn pair(a: &str, b: &str) -> BasisLabel {
    BasisLabel::new(a, b)
}

fn dressed(name: &str, terms: &[(&str, &str, f64)]) -> DressedDef {
    DressedDef {
        name: name.into(),
        terms: terms.iter().map(|&(a, b, w)| (pair(a, b), w)).collect(),
    }
}

impl SchemeSpec {
    pub fn new(id: SchemeId) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match id {
            SchemeId::Forster => SchemeSpec {
                id,
                atom1_levels: levels(&["0", "1", "p", "d", "f"]),
                atom2_levels: levels(&["0", "1", "p", "d", "f"]),
                drives: vec![drive(0, "d"), drive(1, "d")],
                // sqrt2 V |dd><r_pf| with r_pf = (|pf> + |fp>)/sqrt2
                dd_term: vec![
                    Coupling {
                        ket: pair("d", "d"),
                        bra: pair("p", "f"),
                        prefactor: 1.0,
                    },
                    Coupling {
                        ket: pair("d", "d"),
                        bra: pair("f", "p"),
                        prefactor: 1.0,
                    },
                ],
                dressed_defs: vec![
                    dressed("psi", &[("1", "d", h), ("d", "1", h)]),
                    dressed("r_pf", &[("p", "f", h), ("f", "p", h)]),
                    dressed("plus", &[("d", "d", h), ("p", "f", 0.5), ("f", "p", 0.5)]),
                    dressed(
                        "minus",
                        &[("d", "d", h), ("p", "f", -0.5), ("f", "p", -0.5)],
                    ),
                ],
            },
            SchemeId::SpinExchange => SchemeSpec {
                id,
                atom1_levels: levels(&["0", "1", "p", "d"]),
                atom2_levels: levels(&["0", "1", "p", "d"]),
                drives: vec![drive(0, "p"), drive(1, "d")],
                dd_term: vec![Coupling {
                    ket: pair("p", "d"),
                    bra: pair("d", "p"),
                    prefactor: 1.0,
                }],
                dressed_defs: vec![
                    dressed("phi", &[("1", "d", h), ("p", "1", h)]),
                    dressed("plus", &[("p", "d", h), ("d", "p", h)]),
                    dressed("minus", &[("p", "d", h), ("d", "p", -h)]),
                ],
            },
            SchemeId::CollectiveExchange => SchemeSpec {
                id,
                atom1_levels: levels(&["0", "1", "s", "p"]),
                atom2_levels: levels(&["0", "1", "s'", "p'"]),
                drives: vec![drive(0, "s"), drive(1, "s'")],
                dd_term: vec![Coupling {
                    ket: pair("s", "s'"),
                    bra: pair("p", "p'"),
                    prefactor: 1.0,
                }],
                dressed_defs: vec![
                    dressed("xi", &[("1", "s'", h), ("s", "1", h)]),
                    dressed("plus", &[("s", "s'", h), ("p", "p'", h)]),
                    dressed("minus", &[("s", "s'", h), ("p", "p'", -h)]),
                ],
            },
            SchemeId::VdwReference => SchemeSpec {
                id,
                atom1_levels: levels(&["0", "1", "d"]),
                atom2_levels: levels(&["0", "1", "d"]),
                drives: vec![drive(0, "d"), drive(1, "d")],
                dd_term: vec![Coupling {
                    ket: pair("d", "d"),
                    bra: pair("d", "d"),
                    prefactor: 1.0,
                }],
                dressed_defs: vec![dressed("psi", &[("1", "d", h), ("d", "1", h)])],
            },
        }
    }

    pub fn basis(&self) -> Result<Arc<Basis>> {
        Ok(Arc::new(Basis::two_atom(
            &self.atom1_levels,
            &self.atom2_levels,
        )?))
    }

    pub fn atom_levels(&self, atom: usize) -> &[String] {
        if atom == 0 {
            &self.atom1_levels
        } else {
            &self.atom2_levels
        }
    }

    /// Non-ground levels of one atom, in declared order.
    pub fn rydberg_levels(&self, atom: usize) -> Vec<&str> {
        self.atom_levels(atom)
            .iter()
            .map(|s| s.as_str())
            .filter(|l| !GROUND.contains(l))
            .collect()
    }

    pub fn is_rydberg(level: &str) -> bool {
        !GROUND.contains(&level)
    }

    /// Number of atoms in a Rydberg level for basis vector `i`.
    pub fn excitations(&self, basis: &Basis, i: usize) -> usize {
        basis
            .label_parts(i)
            .iter()
            .filter(|l| Self::is_rydberg(l))
            .count()
    }

    /// Checks that every label the spec refers to is declared.
    pub fn validate(&self) -> Result<()> {
        let b = self.basis()?;
        for d in &self.drives {
            if d.atom > 1 {
                return Err(Error::InvalidParameter(format!("drive on atom {}", d.atom)));
            }
            let lv = self.atom_levels(d.atom);
            for l in [&d.ground, &d.rydberg] {
                if !lv.contains(l) {
                    return Err(Error::UnknownLevel(l.clone()));
                }
            }
        }
        for cpl in &self.dd_term {
            b.index_of_pair(&cpl.ket)?;
            b.index_of_pair(&cpl.bra)?;
        }
        for def in &self.dressed_defs {
            let n: f64 = def.terms.iter().map(|(_, w)| w * w).sum();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "dressed state `{}` is not normalized",
                    def.name
                )));
            }
            for (l, _) in &def.terms {
                b.index_of_pair(l)?;
            }
        }
        Ok(())
    }
}
