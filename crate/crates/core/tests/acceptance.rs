//! Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Run with `cargo test -p ddrab-core --release --test acceptance`.
//! The process exits non-zero when a criterion outside `KNOWN_DIVERGENT` fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ddrab::dynamics::{check_density, PhysicalityLimits, PhysicalityReport, SteadyOptions};
use ddrab::effective::verify_closed_form;
use ddrab::experiments::*;
use ddrab::model::{
    balanced_distance_ratio, condition_sensitivity, dd_strength, mhz, Preset, RabCondition,
};
use ddrab::Error;

mod tol {
    /// Closed-form match, relative to `Omega^2 / Delta`.
    pub const CLOSED_FORM_REL: f64 = 1e-10;
    pub const POPULATION_MIN: f64 = 0.95;
    /// `|t_peak - T/2| / T`.
    pub const PEAK_TIME_REL: f64 = 0.1;
    pub const OVERLAY_MAX: f64 = 0.05;
    pub const GEOMETRIC_ABS: f64 = 0.003;
    pub const SENSITIVITY_ABS: f64 = 1e-3;
    pub const FIDELITY_THRESHOLD: f64 = 0.9;
    pub const STEADY_INFIDELITY_MAX: f64 = 1e-3;
    pub const STEADY_AGREEMENT: f64 = 0.005;
    pub const DT_HALVING: f64 = 1e-6;
    pub const STRENGTH_REL: f64 = 2e-3;
    /// Expected strength 2 pi x 94.07 MHz, to its last digit.
    pub const STRENGTH_TARGET_ABS_MHZ: f64 = 0.005;
}

/// Criteria expected to fail; the analysis is kept with the project notes.
/// 3: the target geometric-gate numbers follow the square-root fidelity.
const KNOWN_DIVERGENT: &[u32] = &[3];

const GEOMETRIC_TARGET: [(f64, f64); 5] = [
    (PI, 0.9969),
    (0.75 * PI, 0.9962),
    (0.5 * PI, 0.9949),
    (0.25 * PI, 0.9938),
    (PI / 6.0, 0.9936),
];

#[derive(Default)]
struct Audit {
    reports: Vec<(String, PhysicalityReport)>,
    halving: Vec<(String, f64)>,
    violations: Vec<String>,
}

impl Audit {
    fn report(&mut self, what: impl Into<String>, r: PhysicalityReport) {
        self.reports.push((what.into(), r));
    }

    fn halving(&mut self, what: impl Into<String>, a: f64, b: f64) {
        self.halving.push((what.into(), (a - b).abs()));
    }

    fn error(&mut self, e: &Error) {
        if let Error::Physicality { .. } = e {
            self.violations.push(e.to_string());
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            detail,
            info: Vec::new(),
        }
    }
}

type Check = fn(&mut Audit) -> Result<Outcome, Error>;

fn criterion_1(_: &mut Audit) -> Result<Outcome, Error> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for name in [
        "forster-ravets",
        "spin-exchange-barredo",
        "collective-gorniaczyk",
    ] {
        let p = Preset::named(name)?;
        let chk = verify_closed_form(&p.spec(), &p.drive()?, &p.interaction())?;
        let rel = chk.max_deviation / chk.scale;
        worst = worst.max(rel);
        parts.push(format!("{name} {rel:.2e}"));
    }
    Ok(Outcome::new(
        worst <= tol::CLOSED_FORM_REL,
        format!("max |dH|/(Omega^2/Delta): {}", parts.join(", ")),
    ))
}

fn criterion_2(audit: &mut Audit) -> Result<Outcome, Error> {
    let opts = RunOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in [
        "forster-ravets",
        "spin-exchange-barredo",
        "collective-gorniaczyk",
    ] {
        let t0 = Instant::now();
        let run = population_dynamics(&Preset::named(name)?, &opts)?;
        let took = t0.elapsed();
        audit.report(format!("population {name}"), run.full.physicality);
        audit.report(
            format!("population {name} (effective)"),
            run.effective.physicality,
        );
        let near_half =
            (run.t_peak - run.gate_time / 2.0).abs() <= tol::PEAK_TIME_REL * run.gate_time;
        let ok = run.peak_double >= tol::POPULATION_MIN
            && near_half
            && run.p11_final >= tol::POPULATION_MIN
            && run.overlay_deviation < tol::OVERLAY_MAX
            && took < Duration::from_secs(120);
        pass &= ok;
        parts.push(format!(
            "{name}: peak {:.4} at t/T {:.3}, P11(T) {:.4}, overlay {:.4}, {:.1}s",
            run.peak_double,
            run.t_peak / run.gate_time,
            run.p11_final,
            run.overlay_deviation,
            took.as_secs_f64()
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn criterion_3(audit: &mut Audit) -> Result<Outcome, Error> {
    let setup = GateSetup::from_preset(&Preset::named("forster-ravets")?)?;
    let opts = RunOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut roots = Vec::new();
    for (theta, target) in GEOMETRIC_TARGET {
        let r = geometric_gate(&setup, theta, &opts)?;
        let fine = geometric_gate(&setup, theta, &opts.refined())?;
        audit.report(format!("geometric {theta:.4}"), r.physicality);
        audit.report(format!("geometric {theta:.4} refined"), fine.physicality);
        audit.halving(format!("geometric {theta:.4}"), r.fidelity, fine.fidelity);
        pass &= (r.fidelity - target).abs() <= tol::GEOMETRIC_ABS;
        parts.push(format!("{:.4}->{:.5} ({target})", theta / PI, r.fidelity));
        roots.push(format!("{:.5}", r.root_fidelity));
    }
    let mut out = Outcome::new(
        pass,
        format!("theta/pi -> F (target): {}", parts.join(", ")),
    );
    out.info.push(format!("sqrt(F): {}", roots.join(", ")));
    Ok(out)
}

fn criterion_4(_: &mut Audit) -> Result<Outcome, Error> {
    let omega = mhz(6.663);
    let delta = 10.0 * omega;
    let sv = condition_sensitivity(RabCondition::VdwRef, omega, delta)?;
    let sd = condition_sensitivity(RabCondition::ForsterFull, omega, delta)?;
    let ratio = balanced_distance_ratio(omega, delta)?;
    let pass = (sv - 0.50167).abs() <= tol::SENSITIVITY_ABS
        && (sd - 0.70818).abs() <= tol::SENSITIVITY_ABS
        && (ratio - 1.41679).abs() <= tol::SENSITIVITY_ABS;
    Ok(Outcome::new(
        pass,
        format!("vdW {sv:.6}, DD {sd:.6}, r_vdW/r_d {ratio:.6}"),
    ))
}

fn scan_audited(
    audit: &mut Audit,
    tag: &str,
    axis: ScanAxis,
    setups: &[(String, GateSetup)],
    values: &[f64],
) -> Result<SweepResult, Error> {
    let opts = RunOptions::default();
    let coarse = robustness_scan(axis, setups, values, &opts)?;
    let fine = robustness_scan(axis, setups, values, &opts.refined())?;
    for (c, label) in coarse.labels.iter().enumerate() {
        for (a, b) in coarse.points[c].iter().zip(&fine.points[c]) {
            let what = format!("{tag} {label} {axis}={:.4e}", a.value);
            audit.report(what.clone(), a.physicality);
            audit.report(format!("{what} refined"), b.physicality);
            audit.halving(what, a.fidelity, b.fidelity);
        }
    }
    Ok(coarse)
}

fn criterion_5(audit: &mut Audit) -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let mut info = Vec::new();

    let setups = [
        ("dd".to_string(), GateSetup::dd_reference()?),
        ("vdw".to_string(), GateSetup::vdw_reference()?),
    ];
    let omegas = default_rabi_values();
    let sweep = scan_audited(audit, "rabi", ScanAxis::OmegaAbs, &setups, &omegas)?;
    let wd = fidelity_window(&omegas, &sweep.fidelities(0), tol::FIDELITY_THRESHOLD);
    let wv = fidelity_window(&omegas, &sweep.fidelities(1), tol::FIDELITY_THRESHOLD);
    let a = wd > wv;
    info.push(format!(
        "(a) F > 0.9 width, rad/us: DD {wd:.2}, vdW {wv:.2}"
    ));

    let cases = distance_cases()?;
    let drs = default_dr_values();
    let pair = |p: &(GateSetup, GateSetup)| {
        [
            ("dd".to_string(), p.0.clone()),
            ("vdw".to_string(), p.1.clone()),
        ]
    };
    let eq = scan_audited(
        audit,
        "dr equal",
        ScanAxis::Dr,
        &pair(&cases.equal_strength),
        &drs,
    )?;
    let (fd, fv) = (eq.fidelities(0), eq.fidelities(1));
    let b1 = fd.iter().zip(&fv).all(|(d, v)| d >= v);
    let margin = fd
        .iter()
        .zip(&fv)
        .map(|(d, v)| d - v)
        .fold(f64::INFINITY, f64::min);
    info.push(format!("(b-i) min F_DD - F_vdW over dr: {margin:.4e}"));

    let strong = scan_audited(
        audit,
        "dr strong",
        ScanAxis::Dr,
        &pair(&cases.strong_dipole),
        &drs,
    )?;
    let (fd, fv) = (strong.fidelities(0), strong.fidelities(1));
    let k0 = drs
        .iter()
        .position(|&x| x == 0.0)
        .expect("dr grid contains 0");
    let mut b2 = true;
    let mut worst: f64 = f64::INFINITY;
    for k in (0..drs.len()).filter(|&k| k != k0) {
        let loss_d = fd[k0] - fd[k];
        let loss_v = fv[k0] - fv[k];
        b2 &= loss_v < loss_d;
        worst = worst.min(loss_d - loss_v);
    }
    info.push(format!(
        "(b-ii) min (loss_DD - loss_vdW) over dr != 0: {worst:.4e}; F(0) DD {:.4}, vdW {:.4}",
        fd[k0], fv[k0]
    ));

    let took = t0.elapsed();
    let pass = a && b1 && b2 && took < Duration::from_secs(15 * 60);
    let mut out = Outcome::new(
        pass,
        format!(
            "(a) {} (b-i) {} (b-ii) {}, {:.0}s",
            verdict(a),
            verdict(b1),
            verdict(b2),
            took.as_secs_f64()
        ),
    );
    out.info = info;
    Ok(out)
}

fn criterion_6(audit: &mut Audit) -> Result<Outcome, Error> {
    let t0 = Instant::now();
    let model = SteadyModel::reference()?;
    let pts = steady_scan(&model, &default_steady_ratios())?;
    let best = pts
        .iter()
        .map(|p| p.infidelity)
        .fold(f64::INFINITY, f64::min);

    let mw = MicrowaveParams::from_ratio(FULL_CHECK_RATIO, &model.drive);
    let eff = steady_entanglement(&model, &mw)?;
    let sopts = SteadyOptions::default();
    let fine_opts = SteadyOptions {
        steps_per_period: 2.0 * sopts.steps_per_period,
        ..sopts
    };
    let lim = PhysicalityLimits::default();
    let mut full = 0.0;
    let mut fulls = Vec::new();
    for o in [sopts, fine_opts] {
        let rho = steady_full_state(&model, &mw, &o)?;
        let mut rep = PhysicalityReport::default();
        let checked = check_density(&rho, f64::INFINITY, &lim, &mut rep);
        audit.report("steady full model", rep);
        if let Err(e) = checked {
            audit.error(&e);
        }
        full = 1.0 - ddrab::qcore::fidelity(&singlet(rho.basis())?, &rho)?;
        fulls.push(full);
    }
    audit.halving("steady full model", fulls[0], fulls[1]);
    let took = t0.elapsed();
    let pass = best < tol::STEADY_INFIDELITY_MAX
        && (full - eff).abs() < tol::STEADY_AGREEMENT
        && took < Duration::from_secs(600);
    Ok(Outcome::new(
        pass,
        format!(
            "min effective infidelity {best:.3e}; at ratio {FULL_CHECK_RATIO}: effective {eff:.3e}, full {:.3e}, {:.0}s",
            fulls[0],
            took.as_secs_f64()
        ),
    ))
}

fn criterion_8(_: &mut Audit) -> Result<Outcome, Error> {
    let v = dd_strength(2.54, 3.0)? / mhz(1.0);
    let pass = (v - 94.0).abs() / 94.0 < tol::STRENGTH_REL
        && (v - 94.07).abs() < tol::STRENGTH_TARGET_ABS_MHZ;
    Ok(Outcome::new(pass, format!("V_d = 2pi x {v:.4} MHz")))
}

fn criterion_7(audit: &Audit) -> Outcome {
    let lim = PhysicalityLimits::default();
    let mut worst = PhysicalityReport::default();
    for (_, r) in &audit.reports {
        worst.merge(r);
    }
    let bad: Vec<&str> = audit
        .reports
        .iter()
        .filter(|(_, r)| !r.within(&lim))
        .map(|(w, _)| w.as_str())
        .collect();
    let (dt_what, dt_worst) =
        audit.halving.iter().fold(
            ("-", 0.0),
            |acc, (w, d)| if *d > acc.1 { (w.as_str(), *d) } else { acc },
        );
    let pass = bad.is_empty() && audit.violations.is_empty() && dt_worst < tol::DT_HALVING;
    let mut out = Outcome::new(
        pass,
        format!(
            "{} runs: trace drift {:.2e}, Hermiticity {:.2e}, min eigenvalue {:.2e}; dt halving {:.2e} over {} fidelities ({dt_what})",
            audit.reports.len(),
            worst.max_trace_drift,
            worst.max_hermiticity,
            worst.min_eigenvalue,
            dt_worst,
            audit.halving.len()
        ),
    );
    out.info
        .extend(bad.iter().map(|w| format!("outside limits: {w}")));
    out.info
        .extend(audit.violations.iter().map(|v| format!("aborted: {v}")));
    out
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print(id: u32, out: &Outcome, took: Duration) {
    let note = if !out.pass && KNOWN_DIVERGENT.contains(&id) {
        " (known divergence)"
    } else {
        ""
    };
    println!(
        "[{}] criterion {id}: {} [{:.1}s]{note}",
        verdict(out.pass),
        out.detail,
        took.as_secs_f64()
    );
    for line in &out.info {
        println!("       info: {line}");
    }
}

fn main() -> ExitCode {
    let checks: [(u32, Check); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (8, criterion_8),
    ];
    let mut audit = Audit::default();
    let mut failed = Vec::new();
    for (id, check) in checks {
        let t0 = Instant::now();
        let out = match check(&mut audit) {
            Ok(o) => o,
            Err(e) => {
                audit.error(&e);
                Outcome::new(false, format!("error: {e}"))
            }
        };
        print(id, &out, t0.elapsed());
        if !out.pass {
            failed.push(id);
        }
    }
    let out = criterion_7(&audit);
    print(7, &out, Duration::ZERO);
    if !out.pass {
        failed.push(7);
    }

    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !KNOWN_DIVERGENT.contains(id))
        .collect();
    println!("acceptance: {} of 8 criteria pass", 8 - failed.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
