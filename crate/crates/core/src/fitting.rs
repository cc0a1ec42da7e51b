//! Least-squares decay fitting, Ramsey series extraction and small fit
//! helpers shared by the gate and coherence scenarios.

use crate::error::{Error, Result};

/// Result of an exponential fit A·e^{−rate·t}.
#[derive(Debug, Clone, Copy)]
pub struct ExpFit {
    pub rate: f64,
    pub amplitude: f64,
    /// Max relative deviation of the data from the fit.
    pub residual: f64,
    /// Set when the residual is large (non-exponential input); no exception.
    pub flagged: bool,
}

impl ExpFit {
    /// 1/rate, +∞ when the fitted rate is not positive.
    pub fn decay_time(&self) -> f64 {
        if self.rate > 0.0 {
            1.0 / self.rate
        } else {
            f64::INFINITY
        }
    }
}

/// Ordinary least squares y = a·x + b. Returns (a, b, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "linear fit needs ≥ 2 equal-length samples".into(),
        ));
    }
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::InvalidParameter("degenerate abscissa".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (slope * a + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok((slope, intercept, r2))
}

/// Log-linear least-squares fit of positive decay data to A·e^{−rate·t}.
/// Needs ≥ 10 samples; non-positive values are excluded and flag the fit.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<ExpFit> {
    if times.len() != values.len() || times.len() < 10 {
        return Err(Error::InvalidParameter(
            "exponential fit needs ≥ 10 samples".into(),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if v > 0.0 {
            xs.push(t);
            ys.push(v.ln());
        }
    }
    let dropped = times.len() - xs.len();
    if xs.len() < 2 {
        return Ok(ExpFit {
            rate: 0.0,
            amplitude: 0.0,
            residual: f64::INFINITY,
            flagged: true,
        });
    }
    let (slope, intercept, _) = linear_fit(&xs, &ys)?;
    let rate = -slope;
    let amplitude = intercept.exp();
    let mut residual = 0.0f64;
    for (&t, &v) in times.iter().zip(values) {
        let model = amplitude * (-rate * t).exp();
        residual = residual.max((v - model).abs() / amplitude.max(1e-300));
    }
    Ok(ExpFit {
        rate,
        amplitude,
        residual,
        flagged: dropped > 0 || residual > 0.05,
    })
}

/// Rabi angular frequency ω from P(t) = sin²(ωt), valid while 2ωt ≤ π.
/// Uses θ(t) = arccos(1 − 2P) = 2ωt and a through-origin least-squares slope.
pub fn rabi_rate_fit(times: &[f64], populations: &[f64]) -> Result<f64> {
    if times.len() != populations.len() || times.len() < 4 {
        return Err(Error::InvalidParameter(
            "rabi fit needs ≥ 4 equal-length samples".into(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &p) in times.iter().zip(populations) {
        let theta = (1.0 - 2.0 * p.clamp(0.0, 1.0)).clamp(-1.0, 1.0).acos();
        num += theta * t;
        den += t * t;
    }
    if den <= 0.0 {
        return Err(Error::InvalidParameter("degenerate time axis".into()));
    }
    Ok(num / den / 2.0)
}

/// Unwrap a phase series in place: removes 2π jumps between samples.
pub fn unwrap_phases(phases: &mut [f64]) {
    let tau = std::f64::consts::TAU;
    let mut offset = 0.0;
    for k in 1..phases.len() {
        let raw = phases[k] + offset;
        let mut diff = raw - phases[k - 1];
        while diff > std::f64::consts::PI {
            offset -= tau;
            diff -= tau;
        }
        while diff < -std::f64::consts::PI {
            offset += tau;
            diff += tau;
        }
        phases[k] += offset;
    }
}

/// One Ramsey sample: fringe contrast and (unwrapped) phase.
#[derive(Debug, Clone, Copy)]
pub struct RamseyPoint {
    pub t: f64,
    pub contrast: f64,
    pub phase: f64,
}

/// Ramsey series from a recorded complex coherence ⟨a|·|b⟩, normalized so a
/// balanced superposition starts at contrast 1.
pub fn ramsey_series(times: &[f64], re: &[f64], im: &[f64]) -> Result<Vec<RamseyPoint>> {
    if times.len() != re.len() || times.len() != im.len() {
        return Err(Error::InvalidParameter(
            "ramsey series needs equal-length columns".into(),
        ));
    }
    let mut phases: Vec<f64> = re.iter().zip(im).map(|(&r, &i)| f64::atan2(i, r)).collect();
    unwrap_phases(&mut phases);
    Ok(times
        .iter()
        .zip(re.iter().zip(im))
        .zip(phases)
        .map(|((&t, (&r, &i)), phase)| RamseyPoint {
            t,
            contrast: 2.0 * (r * r + i * i).sqrt(),
            phase,
        })
        .collect())
}

/// Linear phase slope of a Ramsey series (rad/s).
pub fn ramsey_phase_slope(points: &[RamseyPoint]) -> Result<f64> {
    let t: Vec<f64> = points.iter().map(|p| p.t).collect();
    let ph: Vec<f64> = points.iter().map(|p| p.phase).collect();
    Ok(linear_fit(&t, &ph)?.0)
}

/// Exponential fit of the contrast decay of a Ramsey series, optionally
/// dropping samples before `t_min` (correlated-noise transients).
pub fn ramsey_contrast_fit(points: &[RamseyPoint], t_min: f64) -> Result<ExpFit> {
    let t: Vec<f64> = points
        .iter()
        .filter(|p| p.t >= t_min)
        .map(|p| p.t)
        .collect();
    let c: Vec<f64> = points
        .iter()
        .filter(|p| p.t >= t_min)
        .map(|p| p.contrast)
        .collect();
    fit_exponential(&t, &c)
}
