//! Batch experiment runner: maps scenario names plus a parsed config onto
//! module operations and collects machine-readable outputs.
//!
//! Every summary value is produced by a library operation — no physics lives
//! here. Outputs are gathered in memory and written only after the scenario
//! succeeds, so failed runs leave no partial artifacts.

use num_complex::Complex64 as C64;
use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::{self, NominalConfig};
use crate::cavity::{self, CouplingParams, FockSpace};
use crate::config::Config;
use crate::drive::{ca40_drives, ca40_frame, rwa_hamiltonian, CA40_DRIVEN_INDICES};
use crate::dynamics::required_dt;
use crate::error::{Error, Result};
use crate::fitting;
use crate::gates;
use crate::levels::{build_ca40, LevelScheme, Term};
use crate::linalg::eigh;
use crate::montecarlo::{monte_carlo_dephasing, EnsembleObservable, MonteCarloSpec};
use crate::noise::NoiseModel;
use crate::operator::{Operator, StateVector};
use crate::pumping::{self, PumpingParams};
use crate::subspace::find_protected;

pub const SCENARIOS: [&str; 10] = [
    "darkstates",
    "spectrum",
    "t1",
    "t2",
    "noise",
    "pump",
    "gate",
    "cavity",
    "qnd",
    "budget",
];

/// One named table of equal-length numeric columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(String, Vec<f64>)>,
}

/// Scenario result: ordered key=value summary plus any time-series tables.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOutput {
    pub summary: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl ScenarioOutput {
    fn put(&mut self, key: &str, value: f64) {
        self.summary.push((key.to_string(), fmt_value(value)));
    }

    fn put_str(&mut self, key: &str, value: &str) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    fn put_hz(&mut self, key: &str, rad_s: f64) {
        self.put(key, rad_s);
        self.summary.push((
            format!("{key}_hz"),
            fmt_value(rad_s / std::f64::consts::TAU),
        ));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.parse().ok())
    }
}

/// 17 significant digits, round-trip exact.
fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn nominal_from_config(cfg: &Config) -> Result<NominalConfig> {
    let d = NominalConfig::default();
    Ok(NominalConfig {
        omega1: cfg.frequency("drive.omega1", d.omega1)?,
        omega: cfg.frequency("drive.omega", d.omega)?,
        b_field: cfg.frequency("system.b", d.b_field)?,
        gamma_p: cfg.frequency("system.gamma_p", d.gamma_p)?,
        gamma_d: cfg.frequency("system.gamma_d", d.gamma_d)?,
        drive_fluct: cfg.number("fluct.drive", d.drive_fluct)?,
        dress_fluct: cfg.number("fluct.dress", d.dress_fluct)?,
    })
}

fn driven_block(cfg: &NominalConfig) -> Result<(LevelScheme, Operator, Operator)> {
    let scheme = build_ca40(cfg.gamma_p, cfg.gamma_d)?;
    let drives = ca40_drives(&scheme, cfg.omega1, cfg.omega, cfg.b_field)?;
    let frame = ca40_frame(&scheme, cfg.omega, cfg.b_field)?;
    let h = rwa_hamiltonian(&scheme, &drives, &frame, 1.0)?
        .static_part
        .restricted(&CA40_DRIVEN_INDICES);
    let jz = scheme
        .jz_of_term(Term::D32)
        .restricted(&CA40_DRIVEN_INDICES);
    Ok((scheme, h, jz))
}

/// Dispatch a scenario by name. `seed` overrides any config seed.
pub fn run_scenario(name: &str, cfg: &Config, seed: Option<u64>) -> Result<ScenarioOutput> {
    match name {
        "darkstates" => darkstates(cfg),
        "spectrum" => spectrum(cfg),
        "t1" => t1(cfg),
        "t2" => t2(cfg),
        "noise" => noise(cfg, seed),
        "pump" => pump(cfg),
        "gate" => gate(cfg),
        "cavity" => cavity_scenario(cfg),
        "qnd" => qnd(cfg),
        "budget" => budget(cfg),
        other => Err(Error::Config(format!(
            "unknown scenario '{other}'; expected one of {SCENARIOS:?}"
        ))),
    }
}

fn darkstates(cfg: &Config) -> Result<ScenarioOutput> {
    let nom = nominal_from_config(cfg)?;
    let (_, h, jz) = driven_block(&nom)?;
    let sub = find_protected(&h, &jz, 1e-9 * nom.omega1)?;
    let mut out = ScenarioOutput::default();
    out.put("dimension", sub.dimension() as f64);
    out.put("residual_hd", sub.residual_hd);
    out.put("residual_jz", sub.residual_jz);
    out.put_hz("gap", sub.gap);
    // Block order (p0, p1, d0, d1, d2, d3).
    for d in &sub.dark_basis {
        if d.amp(3).norm() > 0.5 {
            out.put("dark1_d1", d.amp(3).re);
            out.put("dark1_d3", d.amp(5).re);
        } else {
            out.put("dark2_d0", d.amp(2).re);
            out.put("dark2_d2", d.amp(4).re);
        }
    }
    Ok(out)
}

fn spectrum(cfg: &Config) -> Result<ScenarioOutput> {
    let nom = nominal_from_config(cfg)?;
    let (_, h, _) = driven_block(&nom)?;
    let e = eigh(&h)?;
    let mut out = ScenarioOutput::default();
    out.put_hz("omega1", nom.omega1);
    for (k, l) in e.eigenvalues.iter().enumerate() {
        out.put(&format!("eigenvalue_{k}"), *l);
    }
    let expected = [-nom.omega1, -nom.omega1, 0.0, 0.0, nom.omega1, nom.omega1];
    let worst = e
        .eigenvalues
        .iter()
        .zip(expected)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0f64, f64::max);
    out.put("max_deviation_from_expected", worst);
    out.put_str(
        "spectrum_ok",
        if worst <= 1e-10 * nom.omega1 {
            "pass"
        } else {
            "fail"
        },
    );
    Ok(out)
}

fn t1(cfg: &Config) -> Result<ScenarioOutput> {
    let nom = nominal_from_config(cfg)?;
    let t2_star = cfg.number("coherence.t2_star", 1.0e-3)?;
    let eta = cfg.number("coherence.eta", 1.0e-2)?;
    let est = analysis::coherence_budget(&nom, t2_star, eta)?;
    let mut out = ScenarioOutput::default();
    out.put("t1_seconds", est.t1);
    let eps = analysis::admixture(nom.omega1, nom.detuning())?;
    out.put("epsilon", eps);
    out.put_hz("detuning", nom.detuning());
    if cfg.integer("t1.lindblad_check", 1)? != 0 {
        let (sim, formula) = analysis::admixture_decay_check(6.0, 300.0, 2.0, 120.0)?;
        out.put("admixture_decay_rate_simulated", sim);
        out.put("admixture_decay_rate_formula", formula);
        out.put("admixture_decay_rel_error", (sim - formula).abs() / formula);
    }
    Ok(out)
}

fn t2(cfg: &Config) -> Result<ScenarioOutput> {
    let nom = nominal_from_config(cfg)?;
    let t2_star = cfg.number("coherence.t2_star", 1.0e-3)?;
    let eta = cfg.number("coherence.eta", 1.0e-2)?;
    let est = analysis::coherence_budget(&nom, t2_star, eta)?;
    let budget = analysis::shift_budget(&nom)?;
    let mut out = ScenarioOutput::default();
    out.put("t2_bound_seconds", est.t2_bound);
    out.put("t2_relative_seconds", est.t2_rel_bound);
    out.put_str("t2_unbounded", if est.t2_unbounded { "yes" } else { "no" });
    out.put_hz("shift_e1", budget.delta_e1);
    out.put_hz("shift_e2", budget.delta_e2);
    out.put_hz("fluct_e1", budget.fluct_e1);
    out.put_hz("fluct_e2", budget.fluct_e2);
    Ok(out)
}

/// Paired-seed protection experiment: identical noise paths drive a bare
/// d1/d3 superposition and a protected dark-state superposition.
fn noise(cfg: &Config, seed: Option<u64>) -> Result<ScenarioOutput> {
    let sigma = cfg.frequency("noise.sigma", (2.5f64).sqrt())?;
    let tau_c = cfg.number("noise.tau_c", 0.1)?;
    let master_seed = seed.unwrap_or(cfg.integer("noise.seed", 20260809)?);
    let n_traj = cfg.integer("numerics.n_traj", 256)? as usize;
    let t_final = cfg.number("numerics.t_final", 1.1)?;
    let protection_factor = cfg.number("noise.protection_factor", 100.0)?;
    let omega1 = cfg.frequency(
        "drive.omega1_scaled",
        protection_factor * sigma.max(1.0 / tau_c),
    )?;

    let noise_model = NoiseModel::ornstein_uhlenbeck(sigma, tau_c, master_seed)?;
    // One dt for both systems so trajectory seeds pair up exactly.
    let bound = 1.37 * omega1 + 6.0 * sigma * 1.5 + 1.0 / tau_c;
    let dt = required_dt(bound);
    let sample_every = ((t_final / dt) / 400.0).ceil().max(1.0) as usize;

    let inv = 1.0 / 2f64.sqrt();
    // Bare pair: {d1, d3} with Jz = diag(−1/2, 3/2).
    let bare_spec = MonteCarloSpec {
        h_static: Operator::zeros(2),
        noise_op: Operator::from_diag(&[-0.5, 1.5]),
        noise: noise_model,
        psi0: StateVector::from_slice(&[C64::new(inv, 0.0), C64::new(inv, 0.0)]),
        observable: EnsembleObservable::Coherence(
            StateVector::basis(2, 0),
            StateVector::basis(2, 1),
        ),
        n_traj,
        dt,
        t_final,
        sample_every,
    };
    let bare = monte_carlo_dephasing(&bare_spec)?;

    let d1 = gates::block_dark_one();
    let d2 = gates::block_dark_two();
    let jz6 = {
        let diag = [0.0, 0.0, -1.5, -0.5, 0.5, 1.5];
        Operator::from_diag(&diag)
    };
    let protected_spec = MonteCarloSpec {
        h_static: gates::block_hd(omega1),
        noise_op: jz6,
        noise: noise_model,
        psi0: d1
            .scaled(C64::new(inv, 0.0))
            .add(&d2.scaled(C64::new(inv, 0.0))),
        observable: EnsembleObservable::Coherence(d1, d2),
        n_traj,
        dt,
        t_final,
        sample_every,
    };
    let protected = monte_carlo_dephasing(&protected_spec)?;

    let target_rate = 4.0 * sigma * sigma * tau_c;
    // Calibration window: past the correlated-noise transient (t ≥ 3τ_c) and
    // before the ensemble tail where the expected contrast falls below ~0.4
    // and the finite-n estimator noise would dominate the log fit.
    let t_min = cfg.number("noise.fit_t_min", 3.0 * tau_c)?;
    let t_max = cfg.number("noise.fit_t_max", 0.95 / target_rate + tau_c)?;
    let to_points = |r: &crate::montecarlo::EnsembleResult| -> Vec<fitting::RamseyPoint> {
        r.times
            .iter()
            .zip(&r.mean)
            .filter(|(&t, _)| t <= t_max)
            .map(|(&t, &c)| fitting::RamseyPoint {
                t,
                contrast: c,
                phase: 0.0,
            })
            .collect()
    };
    let bare_fit = fitting::ramsey_contrast_fit(&to_points(&bare), t_min)?;
    let prot_fit = fitting::ramsey_contrast_fit(&to_points(&protected), t_min)?;

    let mut out = ScenarioOutput::default();
    out.put("seed", master_seed as f64);
    out.put("n_traj", n_traj as f64);
    out.put("sigma", sigma);
    out.put("tau_c", tau_c);
    out.put("omega1_scaled", omega1);
    out.put("bare_t2_target", 1.0 / target_rate);
    out.put("bare_t2_fitted", bare_fit.decay_time());
    out.put(
        "bare_calibration_rel_error",
        (bare_fit.rate - target_rate).abs() / target_rate,
    );
    out.put("protected_decay_time", prot_fit.decay_time());
    let ratio = prot_fit.decay_time() / bare_fit.decay_time();
    out.put("protection_ratio", ratio);
    out.put_str(
        "protection_ok",
        if ratio >= protection_factor {
            "pass"
        } else {
            "fail"
        },
    );
    out.tables.push(Table {
        name: "contrast".into(),
        columns: vec![
            ("time".into(), bare.times.clone()),
            ("bare_contrast".into(), bare.mean.clone()),
            ("bare_stderr".into(), bare.stderr.clone()),
            ("protected_contrast".into(), protected.mean.clone()),
            ("protected_stderr".into(), protected.stderr.clone()),
        ],
    });
    Ok(out)
}

fn pump(cfg: &Config) -> Result<ScenarioOutput> {
    let params = PumpingParams {
        omega1: cfg.frequency("pump.omega1", 4.0)?,
        pump_s0: cfg.frequency("pump.s0", 20.0)?,
        pump_s1: cfg.frequency("pump.s1", 20.0)?,
        pump_d2: cfg.frequency("pump.d2", 20.0)?,
        laser_linewidth: cfg.frequency("pump.linewidth", 6.0)?,
        branching_s_to_d: cfg.number("system.branching", 14.4)?,
        dt: cfg.number("numerics.dt", 2.5e-4)?,
        t_final: cfg.number("numerics.t_final", 420.0)?,
        sample_every: cfg.integer("numerics.sample_every", 2000)? as usize,
    };
    let gamma_p = cfg.frequency("pump.gamma_p_scaled", 10.0)?;
    let scheme = build_ca40(gamma_p, 0.0)?;
    let rho0 = crate::operator::DensityMatrix::from_pure(&pumping::dark_state_two(&scheme)?);
    let r = pumping::run_ca40_pumping(&scheme, &params, &rho0)?;
    let mut out = ScenarioOutput::default();
    out.put("d1_fidelity", r.d1_fidelity);
    out.put("trace_drift", r.evolution.norm_drift);
    out.put_str(
        "pump_ok",
        if r.d1_fidelity >= 0.99 {
            "pass"
        } else {
            "fail"
        },
    );
    let mut cols = vec![("time".into(), r.evolution.times.clone())];
    for (name, series) in &r.evolution.observables {
        cols.push((name.clone(), series.clone()));
    }
    out.tables.push(Table {
        name: "populations".into(),
        columns: cols,
    });
    Ok(out)
}

fn gate(cfg: &Config) -> Result<ScenarioOutput> {
    let kind = cfg.get_raw("gate.kind").unwrap_or("y").to_string();
    let mut out = ScenarioOutput::default();
    out.put_str("kind", &kind);
    match kind.as_str() {
        "y" => {
            let omega1 = cfg.frequency("gate.omega1_scaled", 1.0)?;
            let omega_g = cfg.frequency("gate.omega_g", 0.01)?;
            let expected = 1.5 * omega_g;
            let duration = cfg.number(
                "gate.duration",
                0.85 * std::f64::consts::FRAC_PI_2 / expected,
            )?;
            let rep = gates::sigma_y_gate(omega_g, omega1, duration)?;
            out.put("rate_fitted", rep.rate);
            out.put("rate_expected", expected);
            out.put("rate_rel_error", (rep.rate - expected).abs() / expected);
            out.put("leakage", rep.leakage);
            out.put("fidelity", rep.fidelity);
        }
        "x" => {
            let omega1 = cfg.frequency("gate.omega1_scaled", 5.0)?;
            let omega_cont = cfg.frequency("gate.omega_cont", 1.0)?;
            let delta = cfg.frequency("gate.delta", 100.0)?;
            let expected = 0.75 * omega_cont * omega_cont / delta;
            let duration = cfg.number(
                "gate.duration",
                0.8 * std::f64::consts::FRAC_PI_2 / expected,
            )?;
            let (rep, p1_max) = gates::raman_sigma_x(omega_cont, delta, omega1, duration)?;
            out.put("rate_fitted", rep.rate);
            out.put("rate_expected", expected);
            out.put("rate_rel_error", (rep.rate - expected).abs() / expected);
            out.put("leakage", rep.leakage);
            out.put("intermediate_population_max", p1_max);
            out.put("fidelity", rep.fidelity);
        }
        "z" => {
            let omega0 = cfg.frequency("gate.omega0", 1.0)?;
            let t_loop = cfg.number("gate.t_loop", 4000.0)?;
            let contour = gates::ContourSpec::rectangle();
            let quad = gates::berry_phase_quadrature(&contour, 40_001)?;
            let r = gates::berry_sigma_z(&contour, omega0, t_loop)?;
            out.put("phase", r.phase);
            out.put("phase_quadrature", quad);
            out.put("phase_error", (r.phase - quad).abs());
            out.put("adiabaticity_error", r.adiabaticity_error);
        }
        other => {
            return Err(Error::Config(format!(
                "gate.kind must be y, x or z, got '{other}'"
            )))
        }
    }
    Ok(out)
}

fn cavity_scenario(cfg: &Config) -> Result<ScenarioOutput> {
    const TAU: f64 = std::f64::consts::TAU;
    let params = CouplingParams {
        g: cfg.frequency("cavity.g_scaled", 1.0)?,
        omega_c: cfg.frequency("cavity.omega_c_scaled", 10.0)?,
        delta: cfg.frequency("cavity.delta_scaled", 1000.0)?,
        kappa: cfg.frequency("cavity.kappa_scaled", 0.0)?,
        gamma_p: cfg.frequency("cavity.gamma_p_scaled", 23.0)?,
        n_ions: cfg.integer("cavity.n_ions", 1)? as usize,
    };
    let n_max = cfg.integer("numerics.n_max", 20)? as usize;
    let fock = FockSpace::new(n_max.min(20))?;
    let model = cavity::effective_beamsplitter(&params, &fock)?;
    let mut out = ScenarioOutput::default();
    out.put("bare_coefficient", model.bare_coefficient);
    out.put("dark_coefficient", model.dark_coefficient);
    out.put(
        "dark_bare_ratio",
        model.dark_coefficient / model.bare_coefficient,
    );
    out.put_str("regime_ok", if model.regime_ok { "pass" } else { "fail" });

    let small = FockSpace::new(2)?;
    let full_rate = cavity::beamsplitter_full_swap_rate(&params, &small)?;
    out.put("full_swap_rate", full_rate);
    out.put(
        "full_vs_effective_rel_error",
        (full_rate - model.bare_coefficient).abs() / model.bare_coefficient,
    );

    let kappa_eff = model.dark_coefficient;
    let single = cavity::dicke_swap_rate(1, kappa_eff, &small)?;
    for n in [2usize, 3] {
        let rate = cavity::dicke_swap_rate(n, kappa_eff, &small)?;
        out.put(&format!("dicke_ratio_n{n}"), rate / single);
        out.put(&format!("dicke_expected_n{n}"), (n as f64).sqrt());
    }

    // Strong-coupling report at the reference working point.
    let reference = CouplingParams {
        g: TAU * 0.5e6,
        omega_c: 1.0e-2,
        delta: 1.0,
        kappa: cfg.frequency("cavity.kappa", 0.0)?,
        gamma_p: TAU * 23.0e6,
        n_ions: 100,
    };
    let rep = cavity::collective_rate(&reference, cfg.number("cavity.threshold_factor", 10.0)?)?;
    out.put(
        "required_omega_c_over_delta",
        rep.required_omega_c_over_delta,
    );
    out.put_hz("required_kappa_max", rep.required_kappa_max);
    out.put_hz("ion_gamma", rep.gamma);
    out.put_str(
        "strong_coupling",
        if rep.strong_coupling { "yes" } else { "no" },
    );
    Ok(out)
}

fn qnd(cfg: &Config) -> Result<ScenarioOutput> {
    let params = CouplingParams {
        g: cfg.frequency("qnd.g_scaled", 1.0)?,
        omega_c: 0.0,
        delta: cfg.frequency("qnd.delta_scaled", 150.0)?,
        kappa: 0.0,
        gamma_p: 0.0,
        n_ions: 1,
    };
    let omega1 = cfg.frequency("qnd.omega1_scaled", 7.5)?;
    let n_max_eff = cfg.integer("numerics.n_max", 20)? as usize;
    let fock_eff = FockSpace::new(n_max_eff)?;
    let shift = 0.75 * params.g * params.g / params.delta;
    let mut out = ScenarioOutput::default();
    out.put("dark_shift_per_photon", shift);

    let t_eff = cfg.number("qnd.t_effective", 100.0)?;
    let mut ns = Vec::new();
    let mut phases = Vec::new();
    let mut table_n = Vec::new();
    let mut table_phase = Vec::new();
    let mut table_expect = Vec::new();
    for n in 0..=5usize {
        let phase = cavity::qnd_ramsey_effective(&params, n, t_eff, &fock_eff)?;
        ns.push(n as f64);
        phases.push(phase);
        table_n.push(n as f64);
        table_phase.push(phase);
        table_expect.push(shift * t_eff * n as f64);
    }
    let (slope, _, r2) = fitting::linear_fit(&ns, &phases)?;
    out.put("effective_phase_slope", slope);
    out.put("effective_phase_slope_expected", shift * t_eff);
    out.put("effective_linearity_r2", r2);

    if cfg.integer("qnd.full_model", 1)? != 0 {
        let fock = FockSpace::new(5)?;
        let mut worst = 0.0f64;
        for n in 1..=3usize {
            let t = cfg.number("qnd.t_full", 120.0)? / n as f64;
            let phase = cavity::qnd_phase_full(&params, omega1, n, t, &fock)?;
            let expect = shift * t * n as f64;
            let rel = (phase - expect).abs() / expect;
            out.put(&format!("full_phase_n{n}"), phase);
            out.put(&format!("full_phase_expected_n{n}"), expect);
            worst = worst.max(rel);
        }
        out.put("full_phase_worst_rel_error", worst);
    }
    out.tables.push(Table {
        name: "phase_vs_n".into(),
        columns: vec![
            ("n".into(), table_n),
            ("phase".into(), table_phase),
            ("expected".into(), table_expect),
        ],
    });
    Ok(out)
}

fn budget(cfg: &Config) -> Result<ScenarioOutput> {
    let nom = nominal_from_config(cfg)?;
    let sb = analysis::shift_budget(&nom)?;
    let est = analysis::coherence_budget(
        &nom,
        cfg.number("coherence.t2_star", 1.0e-3)?,
        cfg.number("coherence.eta", 1.0e-2)?,
    )?;
    let mut out = ScenarioOutput::default();
    out.put_hz("omega1", nom.omega1);
    out.put_hz("omega", nom.omega);
    out.put_hz("b_field", nom.b_field);
    out.put_hz("detuning", nom.detuning());
    out.put_hz("shift_e1", sb.delta_e1);
    out.put_hz("shift_e2", sb.delta_e2);
    out.put_hz("fluct_e1", sb.fluct_e1);
    out.put_hz("fluct_e2", sb.fluct_e2);
    out.put("epsilon1", sb.epsilon1);
    out.put("epsilon2", sb.epsilon2);
    out.put("t1_seconds", est.t1);
    out.put("t2_bound_seconds", est.t2_bound);
    out.put("t2_relative_seconds", est.t2_rel_bound);

    let pol_error = cfg.number("pol.error", 0.01)?;
    let pol = analysis::polarization_budget(pol_error, nom.omega1, nom.omega, nom.b_field)?;
    out.put_hz("pol_shift_d1", pol.shift_d1);
    out.put_hz("pol_shift_d2", pol.shift_d2);
    out.put("pol_admixture_d1", pol.admixture_d1);
    out.put("pol_admixture_d2", pol.admixture_d2);
    out.put_hz("zeeman_adjacent_gap", pol.adjacent_gap);
    out.put_str("min_gap_ok", if pol.min_gap_ok { "pass" } else { "fail" });

    let db_frac = cfg.number("bfield.delta_b_fraction", 1.0e-5)?;
    let bb = analysis::bfield_gradient_budget(db_frac, nom.b_field, nom.omega1, nom.omega)?;
    out.put_hz("bfield_dark_shift_d1", bb.dark_shift_d1);
    out.put_hz("bfield_dark_shift_d2", bb.dark_shift_d2);
    out.put_hz("bfield_bright_shift_max", bb.bright_shift_max);
    out.put_str("bfield_ok", if bb.pass { "pass" } else { "fail" });
    Ok(out)
}

/// Write summary.txt, one CSV per table, and manifest.txt into `out_dir`.
pub fn write_outputs(
    out_dir: &Path,
    scenario: &str,
    cfg: &Config,
    output: &ScenarioOutput,
    seed: Option<u64>,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut summary = String::new();
    for (k, v) in &output.summary {
        writeln!(summary, "{k} = {v}").expect("string write");
    }
    std::fs::write(out_dir.join("summary.txt"), summary)?;

    for table in &output.tables {
        let mut csv = String::new();
        let header: Vec<&str> = table.columns.iter().map(|(n, _)| n.as_str()).collect();
        csv.push_str(&header.join(","));
        csv.push_str("\r\n");
        let rows = table.columns.first().map(|(_, c)| c.len()).unwrap_or(0);
        for r in 0..rows {
            let row: Vec<String> = table.columns.iter().map(|(_, c)| fmt_value(c[r])).collect();
            csv.push_str(&row.join(","));
            csv.push_str("\r\n");
        }
        std::fs::write(out_dir.join(format!("{}.csv", table.name)), csv)?;
    }

    let mut manifest = String::new();
    writeln!(manifest, "scenario = {scenario}").expect("string write");
    writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION")).expect("string write");
    writeln!(
        manifest,
        "seed = {}",
        seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into())
    )
    .expect("string write");
    for (k, v) in cfg.keys() {
        writeln!(manifest, "config.{k} = {v}").expect("string write");
    }
    std::fs::write(out_dir.join("manifest.txt"), manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn darkstates_summary_has_reference_coefficients() {
        let cfg = Config::parse("").unwrap();
        let out = run_scenario("darkstates", &cfg, None).unwrap();
        let s3 = 3f64.sqrt();
        assert!((out.get("dark1_d1").unwrap() - s3 / 2.0).abs() <= 1e-10);
        assert!((out.get("dark1_d3").unwrap() + 0.5).abs() <= 1e-10);
        assert!((out.get("dark2_d0").unwrap() - 0.5).abs() <= 1e-10);
        assert!((out.get("dark2_d2").unwrap() + s3 / 2.0).abs() <= 1e-10);
    }

    #[test]
    fn spectrum_summary_matches_multiset() {
        let cfg = Config::parse("[drive]\nomega1 = 100 khz\n").unwrap();
        let out = run_scenario("spectrum", &cfg, None).unwrap();
        assert_eq!(out.get("spectrum_ok"), None); // string value
        assert_eq!(
            out.summary
                .iter()
                .find(|(k, _)| k == "spectrum_ok")
                .unwrap()
                .1,
            "pass"
        );
    }

    #[test]
    fn unknown_scenario_is_config_error() {
        let cfg = Config::parse("").unwrap();
        assert!(matches!(
            run_scenario("nope", &cfg, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn budget_scenario_reports_bands() {
        let cfg = Config::parse("").unwrap();
        let out = run_scenario("budget", &cfg, None).unwrap();
        let t1 = out.get("t1_seconds").unwrap();
        assert!((0.9..=1.0).contains(&t1));
        let t2 = out.get("t2_bound_seconds").unwrap();
        assert!((t2 - 10.0).abs() / 10.0 <= 0.2);
    }
}
