//! Second-order effective Hamiltonians by time averaging.
//!
//! The interaction block is diagonalized into dressed states, the drive is
//! rotated into the frame `H_ref = sum_k n_k Delta |k><k|` (with `n_k` the
//! dressed energy rounded to the nearest multiple of `Delta`), split into
//! harmonics `h^dag e^{i w t} + h e^{-i w t}` and averaged:
//! `H_eff = S + sum_w [h_w^dag, h_w] / w`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    build_interaction, interaction_strength, DriveParams, InteractionParams, SchemeId, SchemeSpec,
};
use crate::qcore::{c, commutator, hermitize_check, Basis, DrivenHamiltonian, Ket, Operator, C64};

/// Frequencies closer than this (rad/us) are treated as one harmonic.
pub const MERGE_TOLERANCE: f64 = 1e-6;
/// `max ||h|| / min w` above which the averaging is flagged as unreliable.
pub const VALIDITY_RATIO: f64 = 0.2;

const ZERO_ENERGY: f64 = 1e-9;

/// Eigenbasis of the interaction Hamiltonian.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    /// Columns are dressed states in the product basis.
    pub unitary: Operator,
    pub eigenvalues: Vec<(String, f64)>,
    /// Labeled basis of the dressed frame.
    pub basis: Arc<Basis>,
    /// Indices (in the dressed basis) of the diagonalized block.
    pub block: Vec<usize>,
}

impl DressedBasis {
    /// Diagonalizes the connected block of a static Hermitian operator;
    /// states it does not touch keep their product labels.
    pub fn from_static(h: &Operator) -> Result<Self> {
        let d = h.dim();
        let product = h.basis().clone();
        let scale = h.max_abs();
        if scale == 0.0 {
            return Err(Error::DegenerateBlock);
        }
        let block: Vec<usize> = (0..d)
            .filter(|&i| {
                (0..d).any(|j| h[(i, j)].norm() > 1e-14 * scale || h[(j, i)].norm() > 1e-14 * scale)
            })
            .collect();
        let n = block.len();
        let sub = DMatrix::from_fn(n, n, |i, j| h[(block[i], block[j])]);
        let eig = sub.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

        let mut u = DMatrix::<C64>::identity(d, d);
        for &i in &block {
            u[(i, i)] = c(0.0, 0.0);
        }
        let mut labels = product.labels();
        let mut energies = vec![0.0; d];
        let block_labels = dressed_labels(
            &order
                .iter()
                .map(|&k| eig.eigenvalues[k])
                .collect::<Vec<_>>(),
            scale,
        );
        for (slot, &k) in order.iter().enumerate() {
            let col = block[slot];
            let v = eig.eigenvectors.column(k);
            // fix the phase: largest component (first on ties) real positive
            let mut best = 0;
            for i in 1..n {
                if v[i].norm() > v[best].norm() + 1e-12 {
                    best = i;
                }
            }
            let ph = v[best] / v[best].norm();
            for i in 0..n {
                u[(block[i], col)] = v[i] / ph;
            }
            energies[col] = eig.eigenvalues[k];
            if n > 1 {
                labels[col] = block_labels[slot].clone();
            }
        }
        let basis = Arc::new(Basis::single(&labels)?);
        let eigenvalues = labels.iter().cloned().zip(energies).collect();
        Ok(DressedBasis {
            unitary: Operator::from_matrix(&product, u)?,
            eigenvalues,
            basis,
            block,
        })
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.eigenvalues[i].1
    }

    pub fn energy_of(&self, label: &str) -> Option<f64> {
        self.eigenvalues
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, e)| *e)
    }

    pub fn product_basis(&self) -> &Arc<Basis> {
        self.unitary.basis()
    }

    /// `U^dag A U` as an operator on the dressed basis.
    pub fn to_dressed(&self, a: &Operator) -> Operator {
        Operator::from_matrix(&self.basis, a.conjugate_by(self.unitary.matrix()))
            .expect("dimension preserved")
    }

    /// `U A U^dag` back on the product basis.
    pub fn to_product(&self, a: &Operator) -> Operator {
        let u = self.unitary.matrix();
        Operator::from_matrix(self.product_basis(), u * a.matrix() * u.adjoint())
            .expect("dimension preserved")
    }

    /// Dressed state `label` as a ket on the product basis.
    pub fn ket(&self, label: &str) -> Result<Ket> {
        let i = self.basis.index_of(&[label])?;
        Ket::from_amplitudes(
            self.product_basis(),
            self.unitary.matrix().column(i).iter().copied().collect(),
        )
    }
}

fn dressed_labels(sorted_desc: &[f64], scale: f64) -> Vec<String> {
    let n = sorted_desc.len();
    match n {
        2 => vec!["+".into(), "-".into()],
        3 if sorted_desc[1].abs() < ZERO_ENERGY * scale.max(1.0) => {
            vec!["+".into(), "dark".into(), "-".into()]
        }
        _ => (0..n).map(|k| format!("e{k}")).collect(),
    }
}

/// Dressed basis of a scheme's interaction Hamiltonian.
pub fn dressed_basis(spec: &SchemeSpec, inter: &InteractionParams) -> Result<DressedBasis> {
    let basis = spec.basis()?;
    let v = interaction_strength(spec.id, inter)?;
    if v == 0.0 {
        return Err(Error::DegenerateBlock);
    }
    DressedBasis::from_static(&build_interaction(spec, &basis, v)?)
}

/// One `h^dag e^{i w t} + h e^{-i w t}` component with `w > 0`.
#[derive(Debug, Clone)]
pub struct Harmonic {
    pub op: Operator,
    pub freq: f64,
}

/// Rotated-frame decomposition of a driven Hamiltonian.
#[derive(Debug, Clone)]
pub struct RotatedFrame {
    pub dressed: DressedBasis,
    /// Reference energies `n_k Delta` of the rotating frame, per dressed index.
    pub reference: Vec<f64>,
    pub static_part: Operator,
    pub harmonics: Vec<Harmonic>,
}

impl RotatedFrame {
    /// Reassembles the rotated Hamiltonian at time `t` from its harmonics.
    pub fn reassemble(&self, t: f64) -> Operator {
        let mut h = self.static_part.clone();
        for hm in &self.harmonics {
            let e = C64::from_polar(1.0, hm.freq * t);
            h = &h + &(&hm.op.dagger().scale(e) + &hm.op.scale(e.conj()));
        }
        h
    }

    /// Transforms the lab-frame `H(t)` directly: `R U^dag H U R^dag - H_ref`.
    pub fn rotate_exact(&self, driven: &DrivenHamiltonian, t: f64) -> Operator {
        let hd = self.dressed.to_dressed(&driven.at(t));
        Operator::from_fn(&self.dressed.basis, |j, k| {
            let ph = C64::from_polar(1.0, (self.reference[j] - self.reference[k]) * t);
            let mut z = hd[(j, k)] * ph;
            if j == k {
                z -= c(self.reference[j], 0.0);
            }
            z
        })
    }
}

// Rounding residue of the change of basis would otherwise show up as
// spurious harmonics.
fn chop(mut a: Operator) -> Operator {
    let tol = 1e-13 * a.max_abs();
    let d = a.dim();
    for i in 0..d {
        for j in 0..d {
            if a[(i, j)].norm() < tol {
                a[(i, j)] = c(0.0, 0.0);
            }
        }
    }
    a
}

/// Rotates `driven` into the dressed frame with reference energies rounded to
/// multiples of `unit` and collects the harmonics.
pub fn rotate(
    driven: &DrivenHamiltonian,
    dressed: &DressedBasis,
    unit: f64,
) -> Result<RotatedFrame> {
    if !(unit > 0.0) {
        return Err(Error::InvalidParameter(
            "frame unit must be positive".into(),
        ));
    }
    let d = driven.dim();
    let reference: Vec<f64> = (0..d)
        .map(|k| (dressed.energy(k) / unit).round() * unit)
        .collect();
    let s0 = chop(dressed.to_dressed(&driven.static_part));
    let mut stat = Operator::from_fn(&dressed.basis, |j, k| {
        let mut z = s0[(j, k)];
        if j == k {
            z -= c(reference[j], 0.0);
        }
        z
    });
    // off-diagonal static elements between states with different reference
    // energies oscillate too; treat them as drive content at frequency 0 tone
    let mut pieces: Vec<(f64, Operator)> = Vec::new();
    let push = |freq: f64, r: usize, col: usize, z: C64, pieces: &mut Vec<(f64, Operator)>| {
        if z == c(0.0, 0.0) {
            return;
        }
        let slot = match pieces
            .iter()
            .position(|(f, _)| (f - freq).abs() < MERGE_TOLERANCE)
        {
            Some(i) => i,
            None => {
                pieces.push((freq, Operator::zeros(&dressed.basis)));
                pieces.len() - 1
            }
        };
        pieces[slot].1[(r, col)] += z;
    };
    for j in 0..d {
        for k in 0..d {
            if reference[j] != reference[k] && stat[(j, k)] != c(0.0, 0.0) {
                // upper and lower entries are each other's conjugates; keep j<k as X
                if j < k {
                    push(reference[j] - reference[k], j, k, stat[(j, k)], &mut pieces);
                }
                stat[(j, k)] = c(0.0, 0.0);
            }
        }
    }
    for term in &driven.terms {
        let m = chop(dressed.to_dressed(&term.op));
        for tone in &term.tones {
            for r in 0..d {
                for col in 0..d {
                    push(
                        tone.freq + reference[r] - reference[col],
                        r,
                        col,
                        tone.amplitude * m[(r, col)],
                        &mut pieces,
                    );
                }
            }
        }
    }

    let mut harmonics: Vec<Harmonic> = Vec::new();
    for (f, x) in pieces {
        if f.abs() < MERGE_TOLERANCE {
            stat = &stat + &(&x + &x.dagger());
            continue;
        }
        let (w, h) = if f > 0.0 { (f, x.dagger()) } else { (-f, x) };
        match harmonics
            .iter_mut()
            .find(|hm| (hm.freq - w).abs() < MERGE_TOLERANCE)
        {
            Some(hm) => hm.op = &hm.op + &h,
            None => harmonics.push(Harmonic { op: h, freq: w }),
        }
    }
    harmonics.sort_by(|a, b| a.freq.partial_cmp(&b.freq).unwrap());
    Ok(RotatedFrame {
        dressed: dressed.clone(),
        reference,
        static_part: stat,
        harmonics,
    })
}

/// Harmonic decomposition of a scheme's full Hamiltonian in its dressed frame.
pub fn rotated_harmonics(
    spec: &SchemeSpec,
    drive: &DriveParams,
    inter: &InteractionParams,
) -> Result<RotatedFrame> {
    let driven = crate::model::build_driven(spec, drive, inter)?;
    let dressed = dressed_basis(spec, inter)?;
    rotate(&driven, &dressed, drive.detuning)
}

/// Result of the time-averaging step.
#[derive(Debug, Clone)]
pub struct SecondOrder {
    /// Static part plus second-order correction.
    pub h_eff: Operator,
    /// Second-order correction alone.
    pub correction: Operator,
    /// `max ||h_n|| / min w_n`.
    pub validity_ratio: f64,
}

/// `static_part + sum_n [h_n^dag, h_n] / w_n`, keeping only equal-frequency pairs.
pub fn effective_hamiltonian(
    harmonics: &[Harmonic],
    static_part: &Operator,
) -> Result<SecondOrder> {
    let mut corr = Operator::zeros(static_part.basis());
    let mut max_h: f64 = 0.0;
    let mut min_w = f64::INFINITY;
    for hm in harmonics {
        if !(hm.freq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "harmonic frequency {} is not positive",
                hm.freq
            )));
        }
        corr = &corr + &commutator(&hm.op.dagger(), &hm.op)?.scale_re(1.0 / hm.freq);
        max_h = max_h.max(hm.op.norm2());
        min_w = min_w.min(hm.freq);
    }
    let validity_ratio = if harmonics.is_empty() {
        0.0
    } else {
        max_h / min_w
    };
    if validity_ratio > VALIDITY_RATIO {
        log::warn!("time averaging is marginal: max |h| / min w = {validity_ratio:.3}");
    }
    let h_eff = static_part.checked_add(&corr)?;
    let herm = hermitize_check(&h_eff);
    if herm > 1e-12 * h_eff.max_abs().max(1.0) {
        return Err(Error::NotHermitian(herm));
    }
    Ok(SecondOrder {
        h_eff,
        correction: corr,
        validity_ratio,
    })
}

/// Effective model of a scheme: averaged Hamiltonian in the dressed frame and
/// its derived couplings.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub frame: RotatedFrame,
    /// Effective Hamiltonian on the dressed basis.
    pub h_eff: Operator,
    /// Same operator expressed on the product basis.
    pub h_eff_product: Operator,
    /// `2 |P_2 H_eff |11>|`, the two-photon Rabi frequency.
    pub rabi_eff: f64,
    /// Second-order diagonal shift per dressed label.
    pub stark: BTreeMap<String, f64>,
    pub validity_ratio: f64,
}

/// Builds the effective model; `extra_static` (product basis) is added to
/// the static part before averaging, e.g. a microwave coupling.
pub fn effective_model(
    spec: &SchemeSpec,
    drive: &DriveParams,
    inter: &InteractionParams,
    extra_static: Option<&Operator>,
) -> Result<EffectiveModel> {
    let mut driven = crate::model::build_driven(spec, drive, inter)?;
    if let Some(x) = extra_static {
        driven.static_part = driven.static_part.checked_add(x)?;
    }
    let dressed = dressed_basis(spec, inter)?;
    let frame = rotate(&driven, &dressed, drive.detuning)?;
    let so = effective_hamiltonian(&frame.harmonics, &frame.static_part)?;
    let h_eff_product = dressed.to_product(&so.h_eff);
    let pb = dressed.product_basis().clone();
    let i11 = pb.index_of(&["1", "1"])?;
    let doubles = crate::model::double_excitation_indices(spec, &pb);
    let rabi_eff = 2.0
        * doubles
            .iter()
            .map(|&k| h_eff_product[(k, i11)].norm_sqr())
            .sum::<f64>()
            .sqrt();
    let stark = (0..dressed.basis.dim())
        .map(|k| (dressed.basis.label(k), so.correction[(k, k)].re))
        .collect();
    Ok(EffectiveModel {
        h_eff: so.h_eff,
        h_eff_product,
        rabi_eff,
        stark,
        validity_ratio: so.validity_ratio,
        frame,
    })
}

/// Collapse operators in the rotating frame, split into components of
/// definite frame frequency. Cross terms between components oscillate at
/// multiples of the frame unit and are dropped with the rest of the
/// fast dynamics.
pub fn rotate_lindblads(frame: &RotatedFrame, lindblads: &[Operator]) -> Vec<Operator> {
    let mut out = Vec::new();
    for l in lindblads {
        let m = chop(frame.dressed.to_dressed(l));
        let mut parts: Vec<(f64, Operator)> = Vec::new();
        let d = m.dim();
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                if z == c(0.0, 0.0) {
                    continue;
                }
                let w = frame.reference[i] - frame.reference[j];
                let slot = match parts
                    .iter()
                    .position(|(f, _)| (f - w).abs() < MERGE_TOLERANCE)
                {
                    Some(k) => k,
                    None => {
                        parts.push((w, Operator::zeros(&frame.dressed.basis)));
                        parts.len() - 1
                    }
                };
                parts[slot].1[(i, j)] = z;
            }
        }
        out.extend(parts.into_iter().map(|(_, op)| op));
    }
    out
}

/// Generated vs closed-form effective Hamiltonian.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormCheck {
    pub labels: Vec<String>,
    pub generated: Vec<Vec<(f64, f64)>>,
    pub closed_form: Vec<Vec<(f64, f64)>>,
    pub max_deviation: f64,
    /// `Omega^2 / Delta`, rad/us.
    pub scale: f64,
}

/// Closed form on the product basis: `(Omega^2 / 2 Delta) |11><target| + h.c.`
/// where `target` is the two-excitation state reached by the exchange.
pub fn closed_form(spec: &SchemeSpec, drive: &DriveParams) -> Result<Operator> {
    let basis = spec.basis()?;
    let g = drive.rabi * drive.rabi / (2.0 * drive.detuning);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let target: Vec<(&str, &str, f64)> = match spec.id {
        SchemeId::Forster => vec![("p", "f", h), ("f", "p", h)],
        SchemeId::SpinExchange => vec![("d", "p", 1.0)],
        SchemeId::CollectiveExchange => vec![("p", "p'", 1.0)],
        SchemeId::VdwReference => vec![("d", "d", 1.0)],
    };
    let i11 = basis.index_of(&["1", "1"])?;
    let mut op = Operator::zeros(&basis);
    for (a, b, w) in target {
        let k = basis.index_of(&[a, b])?;
        op[(i11, k)] += c(g * w, 0.0);
        op[(k, i11)] += c(g * w, 0.0);
    }
    Ok(op)
}

/// Compares the generator with the closed form over `{|11>}` and the
/// two-excitation block.
pub fn verify_closed_form(
    spec: &SchemeSpec,
    drive: &DriveParams,
    inter: &InteractionParams,
) -> Result<ClosedFormCheck> {
    let model = effective_model(spec, drive, inter, None)?;
    let cf = closed_form(spec, drive)?;
    let pb = cf.basis().clone();
    let mut idx = vec![pb.index_of(&["1", "1"])?];
    idx.extend(crate::model::double_excitation_indices(spec, &pb));
    let mut dev: f64 = 0.0;
    let mut gen_rows = Vec::new();
    let mut cf_rows = Vec::new();
    for &i in &idx {
        let mut gr = Vec::new();
        let mut cr = Vec::new();
        for &j in &idx {
            let a = model.h_eff_product[(i, j)];
            let b = cf[(i, j)];
            dev = dev.max((a - b).norm());
            gr.push((a.re, a.im));
            cr.push((b.re, b.im));
        }
        gen_rows.push(gr);
        cf_rows.push(cr);
    }
    Ok(ClosedFormCheck {
        labels: idx.iter().map(|&i| pb.label(i)).collect(),
        generated: gen_rows,
        closed_form: cf_rows,
        max_deviation: dev,
        scale: drive.rabi * drive.rabi / drive.detuning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;
    use std::f64::consts::SQRT_2;

    fn preset(name: &str) -> (SchemeSpec, DriveParams, InteractionParams) {
        let p = Preset::named(name).unwrap();
        (p.spec(), p.drive().unwrap(), p.interaction())
    }

    #[test]
    fn forster_dressed_energies() {
        let (spec, _, inter) = preset("forster-ravets");
        let db = dressed_basis(&spec, &inter).unwrap();
        let v = inter.v_d().unwrap();
        assert!((db.energy_of("+").unwrap() - SQRT_2 * v).abs() < 1e-12 * v);
        assert!((db.energy_of("-").unwrap() + SQRT_2 * v).abs() < 1e-12 * v);
        assert!(db.energy_of("dark").unwrap().abs() < 1e-12 * v);
        let u = db.unitary.matrix();
        let err = (u.adjoint() * u - DMatrix::<C64>::identity(25, 25))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-14);
        // phase convention reproduces (|dd> +- |r_pf>)/sqrt2
        let plus = crate::model::dressed_ket(&spec, db.product_basis(), "plus").unwrap();
        assert!((db.ket("+").unwrap().inner(&plus).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exchange_dressed_energies() {
        let (spec, _, inter) = preset("spin-exchange-barredo");
        let db = dressed_basis(&spec, &inter).unwrap();
        let v = inter.v_d().unwrap();
        assert!((db.energy_of("+").unwrap() - v).abs() < 1e-12 * v);
        assert!((db.energy_of("-").unwrap() + v).abs() < 1e-12 * v);
    }

    #[test]
    fn zero_coupling_is_degenerate() {
        let (spec, _, inter) = preset("forster-ravets");
        let zero = InteractionParams { c3: 0.0, ..inter };
        assert!(matches!(
            dressed_basis(&spec, &zero),
            Err(Error::DegenerateBlock)
        ));
    }

    #[test]
    fn single_harmonic_formula() {
        let b = Arc::new(Basis::single(&["a", "b"]).unwrap());
        let h = Operator::from_fn(&b, |i, j| c((i + 2 * j) as f64 * 0.1, 0.05 * i as f64));
        let so = effective_hamiltonian(
            &[Harmonic {
                op: h.clone(),
                freq: 3.0,
            }],
            &Operator::zeros(&b),
        )
        .unwrap();
        let want = commutator(&h.dagger(), &h).unwrap().scale_re(1.0 / 3.0);
        assert!(so.h_eff.max_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn forster_tones() {
        let (spec, mut drive, inter) = preset("forster-ravets");
        // sqrt2 V = 2 Delta exactly
        drive.detuning = SQRT_2 * inter.v_d().unwrap() / 2.0;
        let fr = rotated_harmonics(&spec, &drive, &inter).unwrap();
        let d = drive.detuning;
        let freqs: Vec<f64> = fr.harmonics.iter().map(|h| h.freq / d).collect();
        assert_eq!(freqs.len(), 2, "{freqs:?}");
        assert!((freqs[0] - 1.0).abs() < 1e-12 && (freqs[1] - 3.0).abs() < 1e-12);
        let b = &fr.dressed.basis;
        let i11 = b.index_of(&["11"]).unwrap();
        let ip = b.index_of(&["+"]).unwrap();
        // |Psi><+| is reached through both Delta and 3 Delta
        let psi = crate::model::dressed_ket(&spec, fr.dressed.product_basis(), "psi").unwrap();
        let psi_d = fr.dressed.unitary.dagger().apply(&psi).unwrap();
        for hm in &fr.harmonics {
            let x = psi_d.amplitudes().dotc(&hm.op.matrix().column(ip));
            assert!((x.norm() - drive.rabi / 2.0).abs() < 1e-12 * drive.rabi);
        }
        // |11><Psi| at +-Delta with weight sqrt2 Omega / 2: contributes to h_Delta as both h and h^dag
        let h1 = &fr.harmonics[0].op;
        let to11 = (0..b.dim())
            .map(|k| h1[(i11, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let from11 = (0..b.dim())
            .map(|k| h1[(k, i11)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((to11 - SQRT_2 * drive.rabi / 2.0).abs() < 1e-12 * drive.rabi);
        assert!((from11 - SQRT_2 * drive.rabi / 2.0).abs() < 1e-12 * drive.rabi);
    }

    #[test]
    fn reassembly_matches_rotation() {
        for p in Preset::all() {
            let spec = p.spec();
            let drive = p.drive().unwrap();
            let driven = crate::model::build_driven(&spec, &drive, &p.interaction()).unwrap();
            let fr = rotated_harmonics(&spec, &drive, &p.interaction()).unwrap();
            let mut s = 12345u64;
            for _ in 0..50 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                let t = (s >> 11) as f64 / (1u64 << 53) as f64 * 3.0;
                let a = fr.reassemble(t);
                let b = fr.rotate_exact(&driven, t);
                assert!(
                    a.max_diff(&b).unwrap() < 1e-10 * drive.detuning,
                    "{}",
                    p.name
                );
            }
        }
    }

    #[test]
    fn forster_stark_shifts() {
        let (spec, drive, inter) = preset("forster-ravets");
        let m = effective_model(&spec, &drive, &inter, None).unwrap();
        let s = drive.rabi * drive.rabi / (3.0 * drive.detuning);
        assert!((m.stark["+"] - s).abs() < 1e-10 * s);
        assert!((m.stark["-"] + s).abs() < 1e-10 * s);
        assert!(m.stark["10"].abs() < 1e-12 * s && m.stark["01"].abs() < 1e-12 * s);
        let b = &m.frame.dressed.basis;
        let (i11, ip) = (b.index_of(&["11"]).unwrap(), b.index_of(&["+"]).unwrap());
        let g = SQRT_2 * drive.rabi * drive.rabi / (4.0 * drive.detuning);
        assert!((m.h_eff[(i11, ip)].norm() - g).abs() < 1e-10 * g);
        assert!((m.rabi_eff - drive.rabi * drive.rabi / drive.detuning).abs() < 1e-10 * m.rabi_eff);
    }

    #[test]
    fn closed_forms_hold() {
        for name in [
            "forster-ravets",
            "spin-exchange-barredo",
            "collective-gorniaczyk",
            "vdw-reference",
        ] {
            let (spec, drive, inter) = preset(name);
            let chk = verify_closed_form(&spec, &drive, &inter).unwrap();
            assert!(
                chk.max_deviation < 1e-10 * chk.scale,
                "{name}: {}",
                chk.max_deviation / chk.scale
            );
        }
    }

    #[test]
    fn second_order_scaling() {
        let (spec, drive, inter) = preset("spin-exchange-barredo");
        let mut d2 = drive;
        d2.rabi *= 2.0;
        let a = effective_model(&spec, &drive, &inter, None).unwrap().frame;
        let b = effective_model(&spec, &d2, &inter, None).unwrap().frame;
        let ca = effective_hamiltonian(&a.harmonics, &Operator::zeros(&a.dressed.basis))
            .unwrap()
            .h_eff;
        let cb = effective_hamiltonian(&b.harmonics, &Operator::zeros(&b.dressed.basis))
            .unwrap()
            .h_eff;
        let scale = ca.max_abs();
        for i in 0..ca.dim() {
            for j in 0..ca.dim() {
                assert!((cb[(i, j)] - ca[(i, j)] * 4.0).norm() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn computational_states_decoupled() {
        for p in Preset::all() {
            let m =
                effective_model(&p.spec(), &p.drive().unwrap(), &p.interaction(), None).unwrap();
            let h = &m.h_eff_product;
            let b = h.basis().clone();
            let d = p.drive().unwrap();
            let tol = 1e-12 * d.rabi * d.rabi / d.detuning;
            for lab in [["0", "0"], ["0", "1"], ["1", "0"]] {
                let i = b.index_of(&lab).unwrap();
                for j in 0..b.dim() {
                    if j != i {
                        assert!(
                            h[(i, j)].norm() < tol,
                            "{} {:?}->{}",
                            p.name,
                            lab,
                            b.label(j)
                        );
                    }
                }
            }
        }
    }
}
