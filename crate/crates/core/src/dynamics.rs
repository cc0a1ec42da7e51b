//! Fixed-step RK4 time evolution: Schrödinger, propagator and Lindblad.
//!
//! No adaptive stepping anywhere: reproducibility and a simple error model
//! win at these dimensions, and stiffness is handled by frame choice. The
//! step-size contract is dt ≤ 1/(50·ω_max) with ω_max the spectral scale of
//! H in rad/s (Gershgorin bound for static inputs, caller-supplied for
//! time-dependent ones, where drive oscillation frequencies count too).

use ndarray::{linalg::general_mat_mul, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::operator::{DensityMatrix, Operator, StateVector};

/// Sampled time series of one evolution run.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Named real series, one value per sampled time.
    pub observables: Vec<(String, Vec<f64>)>,
    pub final_state: FinalState,
    pub seed_used: Option<u64>,
    /// |norm(T) − norm(0)| (Schrödinger) or |tr ρ(T) − tr ρ(0)| (Lindblad).
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub enum FinalState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl EvolutionResult {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn final_pure(&self) -> Option<&StateVector> {
        match &self.final_state {
            FinalState::Pure(psi) => Some(psi),
            FinalState::Mixed(_) => None,
        }
    }

    pub fn final_mixed(&self) -> Option<&DensityMatrix> {
        match &self.final_state {
            FinalState::Mixed(rho) => Some(rho),
            FinalState::Pure(_) => None,
        }
    }
}

/// What to record while evolving.
#[derive(Debug, Clone)]
pub enum Observable {
    /// |⟨s|ψ⟩|² or ⟨s|ρ|s⟩.
    Population(StateVector),
    /// ⟨a|ψ⟩⟨ψ|b⟩ or ⟨a|ρ|b⟩; emits `<name>_re` and `<name>_im` columns.
    Coherence(StateVector, StateVector),
    /// Re ⟨A⟩.
    Expectation(Operator),
    /// ⟨ψ|ψ⟩ or tr ρ.
    Norm,
}

#[derive(Debug, Clone)]
pub struct NamedObservable {
    pub name: String,
    pub observable: Observable,
}

impl NamedObservable {
    pub fn new(name: &str, observable: Observable) -> Self {
        Self {
            name: name.into(),
            observable,
        }
    }
}

/// Fixed-step evolution window. `dt` is an upper bound; the actual step
/// divides `t_final` exactly.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Record every n-th step (≥ 1); t = 0 and t = T are always recorded.
    pub sample_every: usize,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_final: f64, sample_every: usize) -> Self {
        Self {
            dt,
            t_final,
            sample_every: sample_every.max(1),
        }
    }

    fn steps_and_dt(&self) -> Result<(usize, f64)> {
        if self.dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
            || self.t_final.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        {
            return Err(Error::InvalidParameter(
                "dt and t_final must be positive".into(),
            ));
        }
        let n = (self.t_final / self.dt).ceil().max(1.0) as usize;
        Ok((n, self.t_final / n as f64))
    }
}

/// Gershgorin-style spectral bound: max over rows of |diag| + Σ|off-diag|.
pub fn spectral_bound(h: &Operator) -> f64 {
    let dim = h.dim();
    let mut worst = 0.0f64;
    for i in 0..dim {
        let mut row = 0.0;
        for j in 0..dim {
            row += h.at(i, j).norm();
        }
        worst = worst.max(row);
    }
    worst
}

/// dt required by the step-size contract for a given spectral bound (rad/s).
pub fn required_dt(bound: f64) -> f64 {
    if bound <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (50.0 * bound)
    }
}

fn check_step(dt: f64, bound: f64) -> Result<()> {
    let req = required_dt(bound);
    if dt > req * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt, required: req });
    }
    Ok(())
}

fn record_pure(obs: &[NamedObservable], psi: &StateVector, out: &mut [Vec<f64>]) {
    let mut col = 0;
    for o in obs {
        match &o.observable {
            Observable::Population(s) => {
                out[col].push(s.dot(psi).norm_sqr());
                col += 1;
            }
            Observable::Coherence(a, b) => {
                let c = a.dot(psi) * psi.dot(b);
                out[col].push(c.re);
                out[col + 1].push(c.im);
                col += 2;
            }
            Observable::Expectation(op) => {
                let v = crate::operator::expectation(psi, op).expect("dims");
                out[col].push(v.re);
                col += 1;
            }
            Observable::Norm => {
                out[col].push(psi.norm() * psi.norm());
                col += 1;
            }
        }
    }
}

fn record_mixed(obs: &[NamedObservable], rho: &Array2<C64>, out: &mut [Vec<f64>]) {
    let dim = rho.nrows();
    let mut col = 0;
    for o in obs {
        match &o.observable {
            Observable::Population(s) => {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..dim {
                    for j in 0..dim {
                        acc += s.amp(i).conj() * rho[(i, j)] * s.amp(j);
                    }
                }
                out[col].push(acc.re);
                col += 1;
            }
            Observable::Coherence(a, b) => {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..dim {
                    for j in 0..dim {
                        acc += a.amp(i).conj() * rho[(i, j)] * b.amp(j);
                    }
                }
                out[col].push(acc.re);
                out[col + 1].push(acc.im);
                col += 2;
            }
            Observable::Expectation(op) => {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..dim {
                    for j in 0..dim {
                        acc += op.at(j, i) * rho[(i, j)];
                    }
                }
                out[col].push(acc.re);
                col += 1;
            }
            Observable::Norm => {
                let tr: C64 = (0..dim).map(|i| rho[(i, i)]).sum();
                out[col].push(tr.re);
                col += 1;
            }
        }
    }
}

fn column_names(obs: &[NamedObservable]) -> Vec<String> {
    let mut names = Vec::new();
    for o in obs {
        match o.observable {
            Observable::Coherence(_, _) => {
                names.push(format!("{}_re", o.name));
                names.push(format!("{}_im", o.name));
            }
            _ => names.push(o.name.clone()),
        }
    }
    names
}

/// RK4 Schrödinger evolution under a static Hamiltonian.
pub fn evolve_schrodinger(
    h: &Operator,
    psi0: &StateVector,
    opts: &EvolveOptions,
    observables: &[NamedObservable],
) -> Result<EvolutionResult> {
    let bound = spectral_bound(h);
    check_step(opts.dt.min(opts.t_final), bound)?;
    let hm = h.mat().clone();
    evolve_schrodinger_td(|_t, out| out.assign(&hm), bound, psi0, opts, observables)
}

/// RK4 Schrödinger evolution under H(t) supplied by a builder closure.
///
/// `bound` must dominate both the spectral scale of H and the oscillation
/// frequencies of its time dependence.
pub fn evolve_schrodinger_td(
    mut h: impl FnMut(f64, &mut Array2<C64>),
    bound: f64,
    psi0: &StateVector,
    opts: &EvolveOptions,
    observables: &[NamedObservable],
) -> Result<EvolutionResult> {
    let (steps, dt) = opts.steps_and_dt()?;
    check_step(dt, bound)?;
    let dim = psi0.dim();
    let mut psi = psi0.vec().clone();
    let norm0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut hbuf = Array2::<C64>::zeros((dim, dim));
    let mut k1 = Array1::<C64>::zeros(dim);
    let mut k2 = Array1::<C64>::zeros(dim);
    let mut k3 = Array1::<C64>::zeros(dim);
    let mut k4 = Array1::<C64>::zeros(dim);
    let mut tmp = Array1::<C64>::zeros(dim);

    let names = column_names(observables);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut times = Vec::new();

    let minus_i = C64::new(0.0, -1.0);
    let matvec = |h: &Array2<C64>, x: &Array1<C64>, y: &mut Array1<C64>| {
        for i in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..dim {
                acc += h[(i, j)] * x[j];
            }
            y[i] = minus_i * acc;
        }
    };

    let state = |v: &Array1<C64>| StateVector::new(v.clone()).expect("finite");
    times.push(0.0);
    record_pure(observables, &state(&psi), &mut cols);

    for step in 0..steps {
        let t = step as f64 * dt;
        h(t, &mut hbuf);
        matvec(&hbuf, &psi, &mut k1);
        for i in 0..dim {
            tmp[i] = psi[i] + 0.5 * dt * k1[i];
        }
        h(t + 0.5 * dt, &mut hbuf);
        matvec(&hbuf, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = psi[i] + 0.5 * dt * k2[i];
        }
        matvec(&hbuf, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = psi[i] + dt * k3[i];
        }
        h(t + dt, &mut hbuf);
        matvec(&hbuf, &tmp, &mut k4);
        for i in 0..dim {
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        if (step + 1) % opts.sample_every == 0 || step + 1 == steps {
            times.push((step + 1) as f64 * dt);
            record_pure(observables, &state(&psi), &mut cols);
        }
    }

    let normf = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(EvolutionResult {
        times,
        observables: names.into_iter().zip(cols).collect(),
        final_state: FinalState::Pure(StateVector::new(psi)?),
        seed_used: None,
        norm_drift: (normf - norm0).abs(),
    })
}

/// RK4 propagator under H(t): returns U(T) and its unitarity residual.
pub fn evolve_propagator_td(
    mut h: impl FnMut(f64, &mut Array2<C64>),
    bound: f64,
    dim: usize,
    opts: &EvolveOptions,
) -> Result<(Operator, f64)> {
    let (steps, dt) = opts.steps_and_dt()?;
    check_step(dt, bound)?;
    let mut u = Array2::<C64>::eye(dim);
    let mut hbuf = Array2::<C64>::zeros((dim, dim));
    let mut k = vec![Array2::<C64>::zeros((dim, dim)); 4];
    let mut tmp = Array2::<C64>::zeros((dim, dim));
    let minus_i = C64::new(0.0, -1.0);
    let zero = C64::new(0.0, 0.0);

    for step in 0..steps {
        let t = step as f64 * dt;
        h(t, &mut hbuf);
        let (k1, rest) = k.split_at_mut(1);
        general_mat_mul(minus_i, &hbuf, &u, zero, &mut k1[0]);
        tmp.assign(&u);
        tmp.scaled_add(C64::new(0.5 * dt, 0.0), &k1[0]);
        h(t + 0.5 * dt, &mut hbuf);
        let (k2, rest2) = rest.split_at_mut(1);
        general_mat_mul(minus_i, &hbuf, &tmp, zero, &mut k2[0]);
        tmp.assign(&u);
        tmp.scaled_add(C64::new(0.5 * dt, 0.0), &k2[0]);
        let (k3, k4) = rest2.split_at_mut(1);
        general_mat_mul(minus_i, &hbuf, &tmp, zero, &mut k3[0]);
        tmp.assign(&u);
        tmp.scaled_add(C64::new(dt, 0.0), &k3[0]);
        h(t + dt, &mut hbuf);
        general_mat_mul(minus_i, &hbuf, &tmp, zero, &mut k4[0]);
        let w = dt / 6.0;
        for i in 0..dim {
            for j in 0..dim {
                u[(i, j)] +=
                    w * (k1[0][(i, j)] + 2.0 * (k2[0][(i, j)] + k3[0][(i, j)]) + k4[0][(i, j)]);
            }
        }
    }
    let u = Operator::new(u)?;
    let resid = u.unitarity_residual();
    Ok((u, resid))
}

/// One dissipative channel: jump operator and rate (rad/s).
#[derive(Debug, Clone)]
pub struct LindbladChannel {
    pub jump: Operator,
    pub rate: f64,
}

impl LindbladChannel {
    pub fn new(jump: Operator, rate: f64) -> Result<Self> {
        if rate < 0.0 {
            return Err(Error::InvalidParameter("channel rate must be ≥ 0".into()));
        }
        Ok(Self { jump, rate })
    }

    /// Decay |from⟩ → |to⟩ at `rate`.
    pub fn transition(dim: usize, from: usize, to: usize, rate: f64) -> Result<Self> {
        let mut jump = Operator::zeros(dim);
        jump.set(to, from, C64::new(1.0, 0.0));
        Self::new(jump, rate)
    }

    /// Pure dephasing of one level against the rest: L = |level⟩⟨level|.
    pub fn dephase_level(dim: usize, level: usize, rate: f64) -> Result<Self> {
        let mut jump = Operator::zeros(dim);
        jump.set(level, level, C64::new(1.0, 0.0));
        Self::new(jump, rate)
    }
}

enum JumpKind {
    /// L = amp·|to⟩⟨from| (covers transitions and single-level dephasing).
    SingleElement {
        from: usize,
        to: usize,
        w: f64,
    },
    General {
        l: Array2<C64>,
        ldl: Array2<C64>,
    },
}

fn classify(ch: &LindbladChannel) -> JumpKind {
    let dim = ch.jump.dim();
    let mut nonzero = None;
    let mut count = 0;
    for i in 0..dim {
        for j in 0..dim {
            if ch.jump.at(i, j).norm() > 0.0 {
                count += 1;
                nonzero = Some((i, j));
            }
        }
    }
    match (count, nonzero) {
        (1, Some((to, from))) => JumpKind::SingleElement {
            from,
            to,
            w: ch.rate * ch.jump.at(to, from).norm_sqr(),
        },
        _ => {
            let l = ch.jump.mat().mapv(|z| z * ch.rate.sqrt());
            let lop = Operator::new(l.clone()).expect("square");
            let ldl = lop.dagger().matmul(&lop).expect("square").into_mat();
            JumpKind::General { l, ldl }
        }
    }
}

/// Lindblad options: positivity is checked at sampled times by default.
#[derive(Debug, Clone, Copy)]
pub struct LindbladOptions {
    pub evolve: EvolveOptions,
    pub check_positivity: bool,
}

impl LindbladOptions {
    pub fn new(evolve: EvolveOptions) -> Self {
        Self {
            evolve,
            check_positivity: true,
        }
    }
}

/// RK4 integration of the Lindblad master equation with a static Hamiltonian.
///
/// Trace is preserved within 1e-8 per 10⁴ steps at the contract step size;
/// the sampled-time positivity check rejects eigenvalues below −1e-8.
pub fn evolve_lindblad(
    h: &Operator,
    channels: &[LindbladChannel],
    rho0: &DensityMatrix,
    opts: &LindbladOptions,
    observables: &[NamedObservable],
) -> Result<EvolutionResult> {
    let dim = rho0.dim();
    if h.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "H dim {} vs ρ dim {}",
            h.dim(),
            dim
        )));
    }
    let mut bound = spectral_bound(h);
    for ch in channels {
        bound += ch.rate * ch.jump.fro_norm().powi(2);
    }
    let (steps, dt) = opts.evolve.steps_and_dt()?;
    check_step(dt, bound)?;

    let kinds: Vec<JumpKind> = channels.iter().map(classify).collect();
    // Flat row-major buffers: ndarray's small-matrix dispatch overhead
    // dominates at these dimensions otherwise.
    let hflat: Vec<C64> = h.mat().iter().copied().collect();
    let mut rho: Vec<C64> = rho0.mat().iter().copied().collect();
    let tr0 = (0..dim).map(|i| rho[i * dim + i].re).sum::<f64>();
    let general: Vec<(Vec<C64>, Vec<C64>, Vec<C64>)> = kinds
        .iter()
        .filter_map(|k| match k {
            JumpKind::General { l, ldl } => {
                let lf: Vec<C64> = l.iter().copied().collect();
                let ldagf: Vec<C64> = (0..dim * dim)
                    .map(|n| l[(n % dim, n / dim)].conj())
                    .collect();
                let ldlf: Vec<C64> = ldl.iter().copied().collect();
                Some((lf, ldagf, ldlf))
            }
            JumpKind::SingleElement { .. } => None,
        })
        .collect();
    let singles: Vec<(usize, usize, f64)> = kinds
        .iter()
        .filter_map(|k| match k {
            JumpKind::SingleElement { from, to, w } => Some((*from, *to, *w)),
            JumpKind::General { .. } => None,
        })
        .collect();

    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    let deriv = |r: &[C64], out: &mut [C64], scratch: &mut [C64]| {
        // −i[H, ρ] fused into one triple loop.
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim {
                    acc +=
                        hflat[i * dim + k] * r[k * dim + j] - r[i * dim + k] * hflat[k * dim + j];
                }
                out[i * dim + j] = C64::new(acc.im, -acc.re); // ×(−i)
            }
        }
        for &(from, to, w) in &singles {
            out[to * dim + to] += w * r[from * dim + from];
            for j in 0..dim {
                out[from * dim + j] -= 0.5 * w * r[from * dim + j];
                out[j * dim + from] -= 0.5 * w * r[j * dim + from];
            }
        }
        for (lf, ldagf, ldlf) in &general {
            // scratch = LρL†; out += scratch − ½{L†L, ρ}
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..dim {
                        acc += lf[i * dim + k] * r[k * dim + j];
                    }
                    scratch[i * dim + j] = acc;
                }
            }
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    let mut anti = C64::new(0.0, 0.0);
                    for k in 0..dim {
                        acc += scratch[i * dim + k] * ldagf[k * dim + j];
                        anti +=
                            ldlf[i * dim + k] * r[k * dim + j] + r[i * dim + k] * ldlf[k * dim + j];
                    }
                    out[i * dim + j] += acc - 0.5 * anti;
                }
            }
        }
    };

    let names = column_names(observables);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut times = vec![0.0];
    let as_array = |r: &[C64]| Array2::from_shape_vec((dim, dim), r.to_vec()).expect("shape");
    record_mixed(observables, &as_array(&rho), &mut cols);

    let nn = dim * dim;
    let mut k1 = vec![C64::new(0.0, 0.0); nn];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    for step in 0..steps {
        deriv(&rho, &mut k1, &mut scratch);
        for n in 0..nn {
            tmp[n] = rho[n] + 0.5 * dt * k1[n];
        }
        deriv(&tmp, &mut k2, &mut scratch);
        for n in 0..nn {
            tmp[n] = rho[n] + 0.5 * dt * k2[n];
        }
        deriv(&tmp, &mut k3, &mut scratch);
        for n in 0..nn {
            tmp[n] = rho[n] + dt * k3[n];
        }
        deriv(&tmp, &mut k4, &mut scratch);
        let w = dt / 6.0;
        for n in 0..nn {
            rho[n] += w * (k1[n] + 2.0 * (k2[n] + k3[n]) + k4[n]);
        }
        if (step + 1) % opts.evolve.sample_every == 0 || step + 1 == steps {
            times.push((step + 1) as f64 * dt);
            let snapshot = as_array(&rho);
            record_mixed(observables, &snapshot, &mut cols);
            if opts.check_positivity {
                let op = Operator::new(snapshot)?.hermitized();
                let eig = eigh(&op)?;
                let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
                if min < -1e-8 {
                    return Err(Error::NumericalContract(format!(
                        "density matrix eigenvalue {min:.3e} < −1e-8 at t = {:.6e}",
                        (step + 1) as f64 * dt
                    )));
                }
            }
        }
    }

    let trf = (0..dim).map(|i| rho[i * dim + i].re).sum::<f64>();
    let rho = as_array(&rho);
    Ok(EvolutionResult {
        times,
        observables: names.into_iter().zip(cols).collect(),
        final_state: FinalState::Mixed(DensityMatrix::new(rho)?),
        seed_used: None,
        norm_drift: (trf - tr0).abs(),
    })
}
