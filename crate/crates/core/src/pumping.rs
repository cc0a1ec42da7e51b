//! Optical pumping into the first dark state.
//!
//! Three repump beams (s0→p1, s1→p1, d2→p1) run on top of the protected-
//! subspace drives. |D₂⟩ is pumped out through its d2 component while |D₁⟩
//! is dark to every applied field, so spontaneous decay funnels all
//! population into |D₁⟩. Beams from independent sources carry finite laser
//! linewidth, modeled as pure dephasing of each beam's lower level; without
//! it, coherent population trapping in multi-source superpositions (e.g. the
//! s0/s1 dark combination) would stall the pump at the few-percent level.

use num_complex::Complex64 as C64;

use crate::drive::{ca40_drives, ca40_frame, rwa_static, DriveField, Polarization};
use crate::dynamics::{
    evolve_lindblad, EvolutionResult, EvolveOptions, LindbladChannel, LindbladOptions,
    NamedObservable, Observable,
};
use crate::error::Result;
use crate::levels::{ca40_decay_channels, LevelScheme};
use crate::operator::{DensityMatrix, StateVector};

/// Scaled-unit pumping scenario parameters (rates in units of a declared
/// frequency scale; defaults sized so the scenario converges in O(10²) time
/// units).
#[derive(Debug, Clone, Copy)]
pub struct PumpingParams {
    pub omega1: f64,
    pub pump_s0: f64,
    pub pump_s1: f64,
    pub pump_d2: f64,
    /// Laser-linewidth dephasing rate applied to s0, s1 and d2.
    pub laser_linewidth: f64,
    pub branching_s_to_d: f64,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
}

impl Default for PumpingParams {
    fn default() -> Self {
        // Scaled units with Γ_P = 10: pump beams near saturation, linewidth
        // fast enough to break multi-source coherent traps, T ≈ 6 pump time
        // constants.
        Self {
            omega1: 4.0,
            pump_s0: 20.0,
            pump_s1: 20.0,
            pump_d2: 20.0,
            laser_linewidth: 6.0,
            branching_s_to_d: crate::levels::CA40_BRANCHING_S_TO_D,
            dt: 2.5e-4,
            t_final: 420.0,
            sample_every: 2000,
        }
    }
}

/// The pump-beam drive list: the three repump beams, resonant in the preset
/// frame.
pub fn ca40_pump_beams(
    scheme: &LevelScheme,
    params: &PumpingParams,
    omega: f64,
    b: f64,
) -> Result<Vec<DriveField>> {
    let frame = ca40_frame(scheme, omega, b)?;
    let mut beams = Vec::new();
    for (lower, rabi, pol) in [
        ("s0", params.pump_s0, Polarization::SigmaPlus),
        ("s1", params.pump_s1, Polarization::Pi),
        ("d2", params.pump_d2, Polarization::Pi),
    ] {
        if rabi <= 0.0 {
            continue;
        }
        let mut d = DriveField {
            lower: lower.into(),
            upper: "p1".into(),
            rabi,
            frequency: 0.0,
            phase: 0.0,
            polarization: pol,
        };
        d.frequency = frame.gap(scheme, &d)?;
        beams.push(d);
    }
    Ok(beams)
}

/// All dissipative channels of the pumping scenario: spontaneous decay per
/// Zeeman channel plus laser-linewidth dephasing of the repumped levels.
pub fn ca40_pump_channels(
    scheme: &LevelScheme,
    params: &PumpingParams,
) -> Result<Vec<LindbladChannel>> {
    let dim = scheme.dimension();
    let mut channels = Vec::new();
    for decay in ca40_decay_channels(scheme, params.branching_s_to_d)? {
        channels.push(LindbladChannel::transition(
            dim,
            scheme.index(&decay.upper)?,
            scheme.index(&decay.lower)?,
            decay.rate,
        )?);
    }
    if params.laser_linewidth > 0.0 {
        for lvl in ["s0", "s1", "d2"] {
            channels.push(LindbladChannel::dephase_level(
                dim,
                scheme.index(lvl)?,
                params.laser_linewidth,
            )?);
        }
    }
    Ok(channels)
}

/// The first dark state (√3/2)|d1⟩ − (1/2)|d3⟩ in the scheme's basis.
pub fn dark_state_one(scheme: &LevelScheme) -> Result<StateVector> {
    let mut v = StateVector::zeros(scheme.dimension());
    v.vec_mut()[scheme.index("d1")?] = C64::new(3f64.sqrt() / 2.0, 0.0);
    v.vec_mut()[scheme.index("d3")?] = C64::new(-0.5, 0.0);
    Ok(v)
}

/// The second dark state (1/2)|d0⟩ − (√3/2)|d2⟩.
pub fn dark_state_two(scheme: &LevelScheme) -> Result<StateVector> {
    let mut v = StateVector::zeros(scheme.dimension());
    v.vec_mut()[scheme.index("d0")?] = C64::new(0.5, 0.0);
    v.vec_mut()[scheme.index("d2")?] = C64::new(-3f64.sqrt() / 2.0, 0.0);
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct PumpingResult {
    pub evolution: EvolutionResult,
    /// Final population in |D₁⟩.
    pub d1_fidelity: f64,
}

/// Integrate the pumping master equation from `rho0` with the given drives
/// and channels; reports the |D₁⟩ population series and final fidelity.
///
/// Every drive must be resonant in `frame` (the pump model is static); a
/// detuned beam is rejected rather than silently dropped.
pub fn optical_pumping(
    scheme: &LevelScheme,
    drives: &[DriveField],
    frame: &crate::drive::FrameSpec,
    channels: &[LindbladChannel],
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
) -> Result<PumpingResult> {
    let h = rwa_static(scheme, drives, frame, f64::INFINITY)?;
    let d1 = dark_state_one(scheme)?;
    let obs = [
        NamedObservable::new("p_d1", Observable::Population(d1.clone())),
        NamedObservable::new("p_d2", Observable::Population(dark_state_two(scheme)?)),
        NamedObservable::new("trace", Observable::Norm),
    ];
    let lopts = LindbladOptions::new(*opts);
    let evolution = evolve_lindblad(&h, channels, rho0, &lopts, &obs)?;
    let d1_fidelity = evolution
        .final_mixed()
        .map(|rho| rho.fidelity_pure(&d1))
        .unwrap_or(0.0);
    Ok(PumpingResult {
        evolution,
        d1_fidelity,
    })
}

/// Assemble and run the full Ca⁺ pumping scenario in scaled units.
pub fn run_ca40_pumping(
    scheme: &LevelScheme,
    params: &PumpingParams,
    rho0: &DensityMatrix,
) -> Result<PumpingResult> {
    // Frequencies only label the beams here; scaled placeholders suffice.
    let omega = 1.0e3;
    let b = 31.0;
    let mut drives = ca40_drives(scheme, params.omega1, omega, b)?;
    drives.extend(ca40_pump_beams(scheme, params, omega, b)?);
    let channels = ca40_pump_channels(scheme, params)?;
    let frame = ca40_frame(scheme, omega, b)?;
    let opts = EvolveOptions::new(params.dt, params.t_final, params.sample_every);
    optical_pumping(scheme, &drives, &frame, &channels, rho0, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::build_ca40;
    use crate::operator::DensityMatrix;

    fn scheme() -> LevelScheme {
        // Scaled decay rates: Γ_P = 20, Γ_D = 0 (negligible on pump scales).
        build_ca40(10.0, 0.0).unwrap()
    }

    #[test]
    fn pump_moves_d2_to_d1() {
        let s = scheme();
        let params = PumpingParams::default();
        let rho0 = DensityMatrix::from_pure(&dark_state_two(&s).unwrap());
        let r = run_ca40_pumping(&s, &params, &rho0).unwrap();
        assert!(
            r.d1_fidelity >= 0.99,
            "pumping fidelity {} < 0.99",
            r.d1_fidelity
        );
    }

    #[test]
    fn d1_is_stationary_under_all_fields() {
        let s = scheme();
        let params = PumpingParams {
            t_final: 100.0,
            ..Default::default()
        };
        let rho0 = DensityMatrix::from_pure(&dark_state_one(&s).unwrap());
        let r = run_ca40_pumping(&s, &params, &rho0).unwrap();
        assert!(
            r.d1_fidelity >= 0.999,
            "dark state leaked: fidelity {}",
            r.d1_fidelity
        );
    }

    #[test]
    fn beams_off_leaves_state_unchanged() {
        let s = scheme();
        let params = PumpingParams {
            pump_s0: 0.0,
            pump_s1: 0.0,
            pump_d2: 0.0,
            laser_linewidth: 0.0,
            t_final: 50.0,
            ..Default::default()
        };
        let rho0 = DensityMatrix::from_pure(&dark_state_two(&s).unwrap());
        let r = run_ca40_pumping(&s, &params, &rho0).unwrap();
        let p_d2 = r.evolution.series("p_d2").unwrap();
        assert!(p_d2.iter().all(|p| *p >= 0.999));
    }

    #[test]
    fn trace_preserved_and_positive() {
        let s = scheme();
        let params = PumpingParams {
            t_final: 60.0,
            ..Default::default()
        };
        let rho0 = DensityMatrix::from_pure(&dark_state_two(&s).unwrap());
        let r = run_ca40_pumping(&s, &params, &rho0).unwrap();
        assert!(r.evolution.norm_drift <= 1e-8);
        let trace = r.evolution.series("trace").unwrap();
        for t in trace {
            assert!((t - 1.0).abs() <= 1e-8);
        }
    }
}
