//! Drive fields, rotating frames and RWA reduction.
//!
//! A drive list assembles the lab Hamiltonian symbolically, so the RWA is
//! exact term filtering against a diagonal frame rather than numeric time
//! averaging: each drive knows its residual detuning in the frame; resonant
//! terms become static, sub-cutoff detuned terms are tracked with explicit
//! detuning bookkeeping, and fast terms are dropped.
//!
//! Phase convention: a drive contributes rabi·cos(ωt − φ)(|u⟩⟨l| + h.c.) in
//! the lab and (rabi/2)e^{iφ}|u⟩⟨l| + h.c. after the RWA, so shifting a
//! drive phase by θ multiplies its matrix element by e^{iθ}.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::levels::LevelScheme;
use crate::operator::{Operator, StateVector};
use crate::subspace::find_protected;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
    Pi,
}

/// One monochromatic coupling between two levels.
#[derive(Debug, Clone)]
pub struct DriveField {
    pub lower: String,
    pub upper: String,
    /// Ω in Ω·cos(ωt − φ), rad/s. Raman fields quoted as 2Ω_cont·cos map to
    /// rabi = 2Ω_cont here.
    pub rabi: f64,
    /// Lab frequency, rad/s.
    pub frequency: f64,
    pub phase: f64,
    pub polarization: Polarization,
}

impl DriveField {
    fn validate(&self, scheme: &LevelScheme) -> Result<(usize, usize)> {
        if self.rabi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "drive {}→{} has negative Rabi rate",
                self.lower, self.upper
            )));
        }
        if self.lower == self.upper {
            return Err(Error::InvalidParameter(format!(
                "drive couples level '{}' to itself",
                self.lower
            )));
        }
        Ok((scheme.index(&self.lower)?, scheme.index(&self.upper)?))
    }
}

/// Diagonal operator defining a rotating frame (and the lab-frame diagonal).
#[derive(Debug, Clone)]
pub struct FrameSpec {
    h0: Operator,
}

impl FrameSpec {
    pub fn new(h0: Operator) -> Result<Self> {
        let mut off = 0.0f64;
        for i in 0..h0.dim() {
            for j in 0..h0.dim() {
                if i != j {
                    off = off.max(h0.at(i, j).norm());
                }
            }
        }
        if off > 1e-12 * h0.max_abs().max(1.0) {
            return Err(Error::InvalidParameter(
                "frame Hamiltonian must be diagonal".into(),
            ));
        }
        Ok(Self { h0 })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self {
            h0: Operator::from_diag(diag),
        }
    }

    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn energy(&self, index: usize) -> f64 {
        self.h0.at(index, index).re
    }

    /// Frame gap E_upper − E_lower for a drive.
    pub fn gap(&self, scheme: &LevelScheme, drive: &DriveField) -> Result<f64> {
        let l = scheme.index(&drive.lower)?;
        let u = scheme.index(&drive.upper)?;
        Ok(self.energy(u) - self.energy(l))
    }
}

/// A tracked sub-cutoff term: operator rotating as e^{iδt} (plus h.c.).
#[derive(Debug, Clone)]
pub struct OscillatingTerm {
    /// (rabi/2)·e^{iφ}·|u⟩⟨l|, without the Hermitian conjugate.
    pub operator: Operator,
    /// Residual frequency δ = (E_u − E_l) − ω, rad/s.
    pub detuning: f64,
    /// Index of the originating drive.
    pub drive: usize,
}

/// RWA reduction of a drive list: static resonant part plus tracked terms.
#[derive(Debug, Clone)]
pub struct RwaHamiltonian {
    pub static_part: Operator,
    pub oscillating: Vec<OscillatingTerm>,
}

impl RwaHamiltonian {
    /// Hamiltonian at time t including the tracked oscillating terms.
    pub fn at_time(&self, t: f64) -> Operator {
        let mut h = self.static_part.clone();
        for term in &self.oscillating {
            let rot = C64::new(0.0, term.detuning * t).exp();
            let m = term.operator.scaled(rot);
            h = &(&h + &m) + &m.dagger();
        }
        h
    }
}

/// Full time-dependent lab-frame Hamiltonian at time `t`:
/// frame diagonal + Σ rabi·cos(ωt − φ)(|u⟩⟨l| + h.c.).
pub fn lab_hamiltonian(
    scheme: &LevelScheme,
    drives: &[DriveField],
    frame: &FrameSpec,
    t: f64,
) -> Result<Operator> {
    let mut h = frame.h0().clone();
    for d in drives {
        let (l, u) = d.validate(scheme)?;
        let amp = d.rabi * (d.frequency * t - d.phase).cos();
        let cur = h.at(u, l);
        h.set(u, l, cur + C64::new(amp, 0.0));
        let cur = h.at(l, u);
        h.set(l, u, cur + C64::new(amp, 0.0));
    }
    Ok(h)
}

/// Exact RWA term filtering against `frame` with detuning tracking.
///
/// Resonant drives (δ = 0 within 1e-9 of the frame scale) contribute
/// (rabi/2)e^{iφ}|u⟩⟨l| + h.c. to the static part; drives with 0 < |δ| <
/// cutoff are returned as tracked oscillating terms; |δ| ≥ cutoff is dropped.
pub fn rwa_hamiltonian(
    scheme: &LevelScheme,
    drives: &[DriveField],
    frame: &FrameSpec,
    cutoff: f64,
) -> Result<RwaHamiltonian> {
    if cutoff <= 0.0 {
        return Err(Error::InvalidParameter("RWA cutoff must be > 0".into()));
    }
    let dim = scheme.dimension();
    let freq_scale = drives
        .iter()
        .map(|d| d.frequency.abs())
        .fold(frame.h0().max_abs(), f64::max)
        .max(1.0);
    let resonance_tol = 1e-9 * freq_scale;

    let mut static_part = Operator::zeros(dim);
    let mut oscillating = Vec::new();
    for (k, d) in drives.iter().enumerate() {
        let (l, u) = d.validate(scheme)?;
        let delta = frame.energy(u) - frame.energy(l) - d.frequency;
        let half = 0.5 * d.rabi * C64::new(0.0, d.phase).exp();
        if delta.abs() <= resonance_tol {
            let cur = static_part.at(u, l);
            static_part.set(u, l, cur + half);
            let cur = static_part.at(l, u);
            static_part.set(l, u, cur + half.conj());
        } else if delta.abs() < cutoff {
            let mut op = Operator::zeros(dim);
            op.set(u, l, half);
            oscillating.push(OscillatingTerm {
                operator: op,
                detuning: delta,
                drive: k,
            });
        }
        // |δ| ≥ cutoff: dropped.
    }
    Ok(RwaHamiltonian {
        static_part,
        oscillating,
    })
}

/// RWA reduction that must be purely static. Any surviving detuned term means
/// the frame is too coarse to hold this drive list in one static matrix.
pub fn rwa_static(
    scheme: &LevelScheme,
    drives: &[DriveField],
    frame: &FrameSpec,
    cutoff: f64,
) -> Result<Operator> {
    let h = rwa_hamiltonian(scheme, drives, frame, cutoff)?;
    if let Some(term) = h.oscillating.first() {
        let d = &drives[term.drive];
        return Err(Error::AmbiguousFrame {
            first: term.drive,
            second: term.drive,
            upper: d.upper.clone(),
            lower: d.lower.clone(),
        });
    }
    Ok(h.static_part)
}

/// Indices of the driven block (p0, p1, d0..d3) within the canonical Ca⁺
/// ordering.
pub const CA40_DRIVEN_INDICES: [usize; 6] = [2, 3, 4, 5, 6, 7];

/// Ca⁺ preset frame diagonal, following the convention that puts the d₃/₂
/// stretched level at zero: d0 −12B/5, d1 −8B/5, d2 −4B/5, d3 0, p1 at the
/// optical reference Δ, p0 at Δ + Ω (the dressing gap as an effective
/// diagonal splitting), s-levels at 0.
pub fn ca40_frame_with_optical(
    scheme: &LevelScheme,
    delta_opt: f64,
    omega: f64,
    b: f64,
) -> Result<FrameSpec> {
    let mut diag = vec![0.0; scheme.dimension()];
    diag[scheme.index("p1")?] = delta_opt;
    diag[scheme.index("p0")?] = delta_opt + omega;
    diag[scheme.index("d0")?] = -12.0 * b / 5.0;
    diag[scheme.index("d1")?] = -8.0 * b / 5.0;
    diag[scheme.index("d2")?] = -4.0 * b / 5.0;
    diag[scheme.index("d3")?] = 0.0;
    Ok(FrameSpec::from_diag(&diag))
}

/// Preset frame with the optical reference at zero (detunings are all that
/// matter for the RWA algebra).
pub fn ca40_frame(scheme: &LevelScheme, omega: f64, b: f64) -> Result<FrameSpec> {
    ca40_frame_with_optical(scheme, 0.0, omega, b)
}

fn ca40_drive(
    scheme: &LevelScheme,
    frame: &FrameSpec,
    lower: &str,
    upper: &str,
    rabi: f64,
    pol: Polarization,
) -> Result<DriveField> {
    let mut d = DriveField {
        lower: lower.into(),
        upper: upper.into(),
        rabi,
        frequency: 0.0,
        phase: 0.0,
        polarization: pol,
    };
    d.frequency = frame.gap(scheme, &d)?;
    Ok(d)
}

/// The four protected-subspace drives of the Ca⁺ preset, each resonant in the
/// preset frame: σ⁺ d1→p1 (Ω₁), σ⁻ d3→p1 (√3Ω₁), σ⁻ d2→p0 (Ω₁),
/// σ⁺ d0→p0 (√3Ω₁). Lab amplitudes halve under the RWA, reproducing the
/// (Ω₁/2, √3Ω₁/2) post-RWA matrix elements.
pub fn ca40_drives(
    scheme: &LevelScheme,
    omega1: f64,
    omega: f64,
    b: f64,
) -> Result<Vec<DriveField>> {
    let frame = ca40_frame(scheme, omega, b)?;
    let s3 = 3f64.sqrt();
    Ok(vec![
        ca40_drive(scheme, &frame, "d1", "p1", omega1, Polarization::SigmaPlus)?,
        ca40_drive(
            scheme,
            &frame,
            "d3",
            "p1",
            s3 * omega1,
            Polarization::SigmaMinus,
        )?,
        ca40_drive(scheme, &frame, "d2", "p0", omega1, Polarization::SigmaMinus)?,
        ca40_drive(
            scheme,
            &frame,
            "d0",
            "p0",
            s3 * omega1,
            Polarization::SigmaPlus,
        )?,
    ])
}

/// Preset drives with a fractional polarization error: each beam keeps
/// (1 − ε) of its amplitude on the intended transition and leaks ε onto the
/// opposite-polarization transition into the same upper level, at the beam's
/// own frequency. The leaked terms sit at detunings ±8B/5.
pub fn ca40_polarization_error_drives(
    scheme: &LevelScheme,
    omega1: f64,
    omega: f64,
    b: f64,
    pol_error: f64,
) -> Result<Vec<DriveField>> {
    if !(0.0..1.0).contains(&pol_error) {
        return Err(Error::InvalidParameter(
            "polarization error must be in [0, 1)".into(),
        ));
    }
    let main = ca40_drives(scheme, omega1, omega, b)?;
    // Opposite-polarization partner transitions into the same upper level.
    let partner = |lower: &str| -> &str {
        match lower {
            "d1" => "d3",
            "d3" => "d1",
            "d2" => "d0",
            "d0" => "d2",
            _ => unreachable!(),
        }
    };
    let mut out = Vec::new();
    for d in &main {
        let mut kept = d.clone();
        kept.rabi *= 1.0 - pol_error;
        out.push(kept);
        if pol_error > 0.0 {
            let leaked_pol = match d.polarization {
                Polarization::SigmaPlus => Polarization::SigmaMinus,
                Polarization::SigmaMinus => Polarization::SigmaPlus,
                Polarization::Pi => Polarization::Pi,
            };
            out.push(DriveField {
                lower: partner(&d.lower).into(),
                upper: d.upper.clone(),
                rabi: d.rabi * pol_error,
                frequency: d.frequency,
                phase: d.phase,
                polarization: leaked_pol,
            });
        }
    }
    Ok(out)
}

/// The six dressed eigenvectors of the driven block: two dark states at zero
/// and the B/C bright pairs at ±Ω₁.
#[derive(Debug, Clone)]
pub struct DressedStructure {
    pub dark: [StateVector; 2],
    pub bright_plus: [StateVector; 2],
    pub bright_minus: [StateVector; 2],
    pub omega1: f64,
}

impl DressedStructure {
    /// Basis-change matrix from (d1, d3, p1) to (D₁, B₁, C₁), rows being the
    /// dressed states.
    pub fn u_d1(&self, p1: usize, d1: usize, d3: usize) -> Operator {
        self.block_unitary(
            [&self.dark[0], &self.bright_plus[0], &self.bright_minus[0]],
            [d1, d3, p1],
        )
    }

    /// Basis-change matrix from (d0, d2, p0) to (D₂, B₂, C₂).
    pub fn u_d2(&self, p0: usize, d0: usize, d2: usize) -> Operator {
        self.block_unitary(
            [&self.dark[1], &self.bright_plus[1], &self.bright_minus[1]],
            [d0, d2, p0],
        )
    }

    fn block_unitary(&self, rows: [&StateVector; 3], cols: [usize; 3]) -> Operator {
        Operator::from_fn(3, |i, j| rows[i].amp(cols[j]))
    }
}

/// Extract the dressed eigenstructure of a Ca⁺ driven-block RWA Hamiltonian.
///
/// The spectrum must split as {0, 0, +Ω₁, +Ω₁, −Ω₁, −Ω₁} within 1e-8·Ω₁,
/// otherwise a diagnostic error is returned. Bright states are identified by
/// their dominant p-level; dark states by their d-manifold support. The dark
/// manifold is cross-checked against the protected-subspace finder.
pub fn dressed_structure(
    h_rwa: &Operator,
    jz: &Operator,
    scheme: &LevelScheme,
    omega1: f64,
) -> Result<DressedStructure> {
    let eig = crate::linalg::eigh(h_rwa)?;
    let tol = 1e-8 * omega1;
    let mut zeros = Vec::new();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() <= tol {
            zeros.push(k);
        } else if (l - omega1).abs() <= tol {
            plus.push(k);
        } else if (l + omega1).abs() <= tol {
            minus.push(k);
        } else {
            return Err(Error::SpectrumMismatch(format!(
                "eigenvalue {l:.6e} is not in {{0, ±Ω₁}} for Ω₁ = {omega1:.6e}"
            )));
        }
    }
    if zeros.len() < 2 || plus.len() != 2 || minus.len() != 2 {
        return Err(Error::SpectrumMismatch(format!(
            "multiplicities (zero {}, +Ω₁ {}, −Ω₁ {}) do not match (≥2, 2, 2)",
            zeros.len(),
            plus.len(),
            minus.len()
        )));
    }

    let p0 = scheme.index("p0")?;
    let p1 = scheme.index("p1")?;
    let pick_bright = |idx: &[usize]| -> Result<[StateVector; 2]> {
        // Element 0 couples to p1 (block 1), element 1 to p0 (block 2).
        let v0 = eig.eigenvector(idx[0]);
        let v1 = eig.eigenvector(idx[1]);
        if v0.amp(p1).norm() >= v1.amp(p1).norm() {
            Ok([v0, v1])
        } else {
            Ok([v1, v0])
        }
    };
    let bright_plus = pick_bright(&plus)?;
    let bright_minus = pick_bright(&minus)?;
    for b in bright_plus.iter().chain(bright_minus.iter()) {
        if b.amp(p0).norm().max(b.amp(p1).norm()) < 0.5 {
            return Err(Error::SpectrumMismatch(
                "bright state lacks the expected 1/√2 p-level weight".into(),
            ));
        }
    }

    // Dark states from the finder (deterministic presentation phases).
    let sub = find_protected(h_rwa, jz, 1e-9 * omega1.max(1.0))?;
    if sub.dimension() != 2 {
        return Err(Error::SpectrumMismatch(format!(
            "protected subspace has dimension {}, expected 2",
            sub.dimension()
        )));
    }
    let d1 = scheme.index("d1")?;
    let a = sub.dark_basis[0].clone();
    let b = sub.dark_basis[1].clone();
    let dark = if a.amp(d1).norm() >= b.amp(d1).norm() {
        [a, b]
    } else {
        [b, a]
    };
    Ok(DressedStructure {
        dark,
        bright_plus,
        bright_minus,
        omega1,
    })
}

/// Which dark-state block a detuned-frame Hamiltonian describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DarkBlock {
    One,
    Two,
}

/// Parameters of the static cross-talk Hamiltonian in the dark/bright basis
/// after the second interaction-picture move.
#[derive(Debug, Clone, Copy)]
pub struct DetunedFrameParams {
    pub omega1: f64,
    /// Signed detuning Δ1 (block one) or Δ2 (block two); the preset has
    /// Δ2 = −Δ1 = Ω + 4B/5.
    pub delta: f64,
    /// Signed fractional amplitude fluctuation of the dark-state drives
    /// (±1/100 at the worst case considered here; 0 for none).
    pub drive_fluct: f64,
    /// Signed fractional fluctuation of the dressing field times Ω; enters
    /// only block one as ±Ω/200-style diagonal and B–C cross terms.
    pub dress_fluct_times_omega: f64,
    pub block: DarkBlock,
}

/// Static 3×3 Hamiltonian in the (D, B, C) basis for one dark-state block:
/// diag(−Δ, Ω₁ ± Ω f/2, −(Ω₁ ∓ Ω f/2)) plus the (Ω₁(1 ± f₁))/(2√2) couplings
/// of the dark state to both bright states, plus the ±Ω f/2 B–C cross term.
pub fn detuned_frame_hamiltonian(p: &DetunedFrameParams) -> Operator {
    let kappa = p.omega1 * (1.0 + p.drive_fluct) / (2.0 * 2f64.sqrt());
    let sign = match p.block {
        DarkBlock::One => 1.0,
        DarkBlock::Two => -1.0,
    };
    let gap_half = match p.block {
        DarkBlock::One => 0.5 * p.dress_fluct_times_omega,
        DarkBlock::Two => 0.0,
    };
    let mut h = Operator::zeros(3);
    h.set(0, 0, C64::new(-p.delta, 0.0));
    h.set(1, 1, C64::new(p.omega1 + gap_half, 0.0));
    h.set(2, 2, C64::new(-(p.omega1 - gap_half), 0.0));
    let k = C64::new(sign * kappa, 0.0);
    h.set(1, 0, k);
    h.set(0, 1, k.conj());
    h.set(2, 0, k);
    h.set(0, 2, k.conj());
    let cross = C64::new(gap_half, 0.0);
    h.set(1, 2, cross);
    h.set(2, 1, cross.conj());
    h
}
