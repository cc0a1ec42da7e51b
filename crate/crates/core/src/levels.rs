//! Atomic level schemes: the ⁴⁰Ca⁺ preset, Zeeman Hamiltonian and
//! spontaneous-decay channels.
//!
//! The magnetic field `B` is everywhere the Zeeman energy scale μ_B·B/ħ in
//! rad/s, so level shifts are simply g_J·m·B and the working gaps (8B/5,
//! 4B/5, …) come out exactly. No Bohr magneton appears anywhere.

use crate::error::{Error, Result};
use crate::operator::{angular_momentum, Axis, Operator, StateVector};

/// Fine-structure term of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    S12,
    P12,
    D32,
    /// User-defined term for custom schemes; carries 2j.
    Custom(u32),
}

impl Term {
    pub fn j(&self) -> f64 {
        match self {
            Term::S12 | Term::P12 => 0.5,
            Term::D32 => 1.5,
            Term::Custom(two_j) => *two_j as f64 / 2.0,
        }
    }
}

/// One atomic sublevel.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: String,
    pub term: Term,
    /// Magnetic quantum number.
    pub m: f64,
    /// Landé g-factor of the parent term.
    pub lande_g: f64,
    /// Total decay rate of the parent term, rad/s.
    pub linewidth: f64,
}

/// Ordered list of sublevels; owns the basis indexing used everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    levels: Vec<Level>,
}

impl LevelScheme {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        for (i, a) in levels.iter().enumerate() {
            if a.m.abs() > a.term.j() + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "level '{}' has |m| > j",
                    a.label
                )));
            }
            if a.linewidth < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "level '{}' has negative linewidth",
                    a.label
                )));
            }
            for b in &levels[..i] {
                if a.label == b.label {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate level label '{}'",
                        a.label
                    )));
                }
            }
        }
        Ok(Self { levels })
    }

    pub fn dimension(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Basis index of a label.
    pub fn index(&self, label: &str) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l.label == label)
            .ok_or_else(|| Error::UnknownLevel(label.into()))
    }

    /// Unit basis vector for a label.
    pub fn ket(&self, label: &str) -> Result<StateVector> {
        Ok(StateVector::basis(self.dimension(), self.index(label)?))
    }

    pub fn level(&self, label: &str) -> Result<&Level> {
        Ok(&self.levels[self.index(label)?])
    }

    /// Diagonal Zeeman Hamiltonian, entry g_J·m·B per level (rad/s).
    pub fn zeeman_hamiltonian(&self, b: f64) -> Operator {
        let diag: Vec<f64> = self.levels.iter().map(|l| l.lande_g * l.m * b).collect();
        Operator::from_diag(&diag)
    }

    /// Jz restricted to the sublevels of `term`, embedded in the full space.
    pub fn jz_of_term(&self, term: Term) -> Operator {
        let diag: Vec<f64> = self
            .levels
            .iter()
            .map(|l| if l.term == term { l.m } else { 0.0 })
            .collect();
        Operator::from_diag(&diag)
    }

    /// Jx or Jy restricted to the sublevels of `term` (assumed contiguous and
    /// m-ordered), embedded in the full space.
    pub fn j_of_term(&self, term: Term, axis: Axis) -> Result<Operator> {
        let idx: Vec<usize> = (0..self.dimension())
            .filter(|&i| self.levels[i].term == term)
            .collect();
        let j = term.j();
        let small = angular_momentum(j, axis)?;
        if small.dim() != idx.len() {
            return Err(Error::InvalidParameter(format!(
                "term has {} sublevels, expected {}",
                idx.len(),
                small.dim()
            )));
        }
        Ok(small.embedded(self.dimension(), &idx))
    }
}

/// Canonical Ca⁺ label order: s0, s1, p0, p1, d0, d1, d2, d3.
pub const CA40_LABELS: [&str; 8] = ["s0", "s1", "p0", "p1", "d0", "d1", "d2", "d3"];

/// Default P₁/₂ total decay rate, 2π × 23 MHz.
pub const CA40_GAMMA_P: f64 = 2.0 * std::f64::consts::PI * 23.0e6;
/// Default D₃/₂ decay rate from the ~1 s lifetime.
pub const CA40_GAMMA_D: f64 = 1.0;
/// Known Ca⁺ branching of P₁/₂ decay into S₁/₂ versus D₃/₂.
pub const CA40_BRANCHING_S_TO_D: f64 = 14.4;

/// Eight-level ⁴⁰Ca⁺ scheme: S₁/₂ (g = 2), P₁/₂ (g = 2/3), D₃/₂ (g = 4/5),
/// labels |x_{j+m}⟩ per the |d_{3/2+m}⟩ convention.
pub fn build_ca40(gamma_p: f64, gamma_d: f64) -> Result<LevelScheme> {
    if gamma_p < 0.0 || gamma_d < 0.0 {
        return Err(Error::InvalidParameter("decay rates must be ≥ 0".into()));
    }
    let mut levels = Vec::new();
    for (i, m) in [-0.5, 0.5].iter().enumerate() {
        levels.push(Level {
            label: format!("s{i}"),
            term: Term::S12,
            m: *m,
            lande_g: 2.0,
            linewidth: 0.0,
        });
    }
    for (i, m) in [-0.5, 0.5].iter().enumerate() {
        levels.push(Level {
            label: format!("p{i}"),
            term: Term::P12,
            m: *m,
            lande_g: 2.0 / 3.0,
            linewidth: gamma_p,
        });
    }
    for (i, m) in [-1.5, -0.5, 0.5, 1.5].iter().enumerate() {
        levels.push(Level {
            label: format!("d{i}"),
            term: Term::D32,
            m: *m,
            lande_g: 4.0 / 5.0,
            linewidth: gamma_d,
        });
    }
    LevelScheme::new(levels)
}

/// Load a user-defined scheme from config sections:
///
/// ```text
/// [scheme]
/// levels = 3
/// [level0]
/// label = g0
/// term = s12          ; s12 | p12 | d32 | custom:<2j>
/// m = -0.5
/// g = 2.0
/// linewidth = 0 rad_s
/// ```
///
/// Returns `Ok(None)` when the config carries no `[scheme]` section.
pub fn scheme_from_config(cfg: &crate::config::Config) -> Result<Option<LevelScheme>> {
    let Some(count) = cfg.get_raw("scheme.levels") else {
        return Ok(None);
    };
    let count: usize = count
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("scheme.levels: bad count '{count}'")))?;
    let mut levels = Vec::with_capacity(count);
    for k in 0..count {
        let key = |field: &str| format!("level{k}.{field}");
        let label = cfg
            .get_raw(&key("label"))
            .ok_or_else(|| Error::InvalidParameter(format!("missing {}", key("label"))))?
            .to_string();
        let term_raw = cfg
            .get_raw(&key("term"))
            .ok_or_else(|| Error::InvalidParameter(format!("missing {}", key("term"))))?;
        let term = match term_raw.to_ascii_lowercase().as_str() {
            "s12" => Term::S12,
            "p12" => Term::P12,
            "d32" => Term::D32,
            other => match other.strip_prefix("custom:") {
                Some(two_j) => Term::Custom(two_j.parse().map_err(|_| {
                    Error::InvalidParameter(format!("{}: bad 2j '{two_j}'", key("term")))
                })?),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "{}: unknown term '{other}'",
                        key("term")
                    )))
                }
            },
        };
        levels.push(Level {
            label,
            term,
            m: cfg.number(&key("m"), f64::NAN)?,
            lande_g: cfg.number(&key("g"), f64::NAN)?,
            linewidth: cfg.frequency(&key("linewidth"), 0.0)?,
        });
        let lvl = levels.last().unwrap();
        if !lvl.m.is_finite() || !lvl.lande_g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "level{k}: m and g are required"
            )));
        }
    }
    LevelScheme::new(levels).map(Some)
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ by the Racah sum,
/// exact for the small angular momenta used here.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, jt: f64, mt: f64) -> f64 {
    if (m1 + m2 - mt).abs() > 1e-9 {
        return 0.0;
    }
    if jt > j1 + j2 + 1e-9 || jt < (j1 - j2).abs() - 1e-9 {
        return 0.0;
    }
    let i = |x: f64| -> i64 { x.round() as i64 };
    if (j1 + j2 + jt - (j1 + j2 + jt).round()).abs() > 1e-9 {
        return 0.0;
    }
    let pre = ((2.0 * jt + 1.0)
        * factorial(i(jt + j1 - j2))
        * factorial(i(jt - j1 + j2))
        * factorial(i(j1 + j2 - jt))
        / factorial(i(j1 + j2 + jt + 1.0)))
    .sqrt()
        * (factorial(i(jt + mt))
            * factorial(i(jt - mt))
            * factorial(i(j1 - m1))
            * factorial(i(j1 + m1))
            * factorial(i(j2 - m2))
            * factorial(i(j2 + m2)))
        .sqrt();
    let mut sum = 0.0;
    for k in 0..=i(j1 + j2 + jt) {
        let d1 = i(j1 + j2 - jt) - k;
        let d2 = i(j1 - m1) - k;
        let d3 = i(j2 + m2) - k;
        let d4 = i(jt - j2 + m1) + k;
        let d5 = i(jt - j1 - m2) + k;
        if d1 < 0 || d2 < 0 || d3 < 0 || d4 < 0 || d5 < 0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign
            / (factorial(k)
                * factorial(d1)
                * factorial(d2)
                * factorial(d3)
                * factorial(d4)
                * factorial(d5));
    }
    pre * sum
}

/// One spontaneous-decay channel |upper⟩ → |lower⟩ at the given rate (rad/s).
#[derive(Debug, Clone)]
pub struct DecayChannel {
    pub upper: String,
    pub lower: String,
    pub rate: f64,
}

/// All P₁/₂ → S₁/₂ and P₁/₂ → D₃/₂ decay channels of the Ca⁺ scheme.
///
/// Within each destination term the Zeeman distribution follows squared
/// Clebsch–Gordan coefficients (normalized per initial sublevel); the overall
/// S:D branching is `branching_s_to_d` (14.4:1 by default for Ca⁺).
pub fn ca40_decay_channels(
    scheme: &LevelScheme,
    branching_s_to_d: f64,
) -> Result<Vec<DecayChannel>> {
    let gamma_p = scheme.level("p0")?.linewidth;
    let frac_s = branching_s_to_d / (branching_s_to_d + 1.0);
    let frac_d = 1.0 / (branching_s_to_d + 1.0);
    let mut channels = Vec::new();
    for p in ["p0", "p1"] {
        let pm = scheme.level(p)?.m;
        for (term, j_low, frac, labels) in [
            (Term::S12, 0.5, frac_s, &["s0", "s1"][..]),
            (Term::D32, 1.5, frac_d, &["d0", "d1", "d2", "d3"][..]),
        ] {
            let _ = term;
            // Relative strengths |⟨j_low m_low; 1 q | 1/2 m_p⟩|², normalized per m_p.
            let mut weights = Vec::new();
            let mut total = 0.0;
            for &low in labels {
                let ml = scheme.level(low)?.m;
                let q = pm - ml;
                if q.abs() > 1.0 + 1e-9 {
                    weights.push(0.0);
                    continue;
                }
                let cg = clebsch_gordan(j_low, ml, 1.0, q, 0.5, pm);
                weights.push(cg * cg);
                total += cg * cg;
            }
            for (&low, w) in labels.iter().zip(weights) {
                if w == 0.0 {
                    continue;
                }
                channels.push(DecayChannel {
                    upper: p.into(),
                    lower: low.into(),
                    rate: gamma_p * frac * w / total,
                });
            }
        }
    }
    Ok(channels)
}
