//! Time evolution of the density matrix under a time-dependent Hamiltonian,
//! optionally with a phonon heating channel.
//!
//! The default integrator samples H at the midpoint of each substep and
//! applies the exact exponential of that frozen matrix (spectral
//! decomposition, so each substep is unitary to machine precision).  A
//! fourth-order commutator-free Magnus variant is available where a longer
//! step at the same step policy is worth two exponentials.
//!
//! Heating enters by first-order splitting: after each unitary substep the
//! exact channel map exp(dt D) is applied, where D is the truncated
//! Lindblad dissipator of the lowering and raising operators.  D couples
//! only density-matrix entries with the same Fock-index offset, so its
//! exponential decomposes into one small matrix per diagonal stripe;
//! those are precomputed once per propagation call.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::SimError;
use crate::hilbert::QuantumState;
use crate::linalg::{dagger, eigh, expm, hermiticity_deviation};

/// A time-dependent Hamiltonian the integrator can sample.
pub trait HamiltonianSource {
    /// Full-space matrix H(t) in rad/us.
    fn matrix(&self, t: f64) -> Array2<C64>;
    /// Largest angular-frequency scale among the terms and their explicit
    /// time dependences; the step policy divides this into substeps.
    fn fastest_angular_frequency(&self) -> f64;
    fn dim(&self) -> usize;
}

/// A fixed matrix as a Hamiltonian (free evolution, tests).
pub struct StaticHamiltonian {
    pub h: Array2<C64>,
    pub fastest: f64,
}

impl HamiltonianSource for StaticHamiltonian {
    fn matrix(&self, _t: f64) -> Array2<C64> {
        self.h.clone()
    }
    fn fastest_angular_frequency(&self) -> f64 {
        self.fastest
    }
    fn dim(&self) -> usize {
        self.h.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    /// Midpoint-sampled exact exponential per substep (default).
    PiecewiseExponential,
    /// Fourth-order commutator-free Magnus: two exponentials per substep
    /// built from the two Gauss-Legendre nodes.
    FourthOrderMagnus,
}

/// Step-size policy for the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    /// Hard cap on the substep, us.
    pub dt_max: f64,
    /// Substeps per 1/(fastest angular frequency); at least 10.
    pub substeps_per_fastest_period: u32,
    pub method: StepMethod,
    /// Largest tolerated population in the top guard level.
    pub leakage_tolerance: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            dt_max: 0.05,
            substeps_per_fastest_period: 10,
            method: StepMethod::PiecewiseExponential,
            leakage_tolerance: 1e-4,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            return Err(SimError::BadStep { dt: self.dt_max });
        }
        if self.substeps_per_fastest_period < 10 {
            return Err(SimError::BadParameter(format!(
                "substeps_per_fastest_period must be >= 10, got {}",
                self.substeps_per_fastest_period
            )));
        }
        if !(self.leakage_tolerance > 0.0) {
            return Err(SimError::BadParameter(
                "leakage tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Effective substep for a Hamiltonian with the given fastest frequency.
    pub fn effective_dt(&self, fastest: f64) -> f64 {
        if fastest > 0.0 {
            self.dt_max.min(1.0 / (fastest * self.substeps_per_fastest_period as f64))
        } else {
            self.dt_max
        }
    }
}

/// Phonon heating/damping channel; rates in 1/us.  Equal rates give the
/// drift d n-bar / dt = gamma_up without changing the steady-state shape,
/// which is the usual trap-heating model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingChannel {
    pub gamma_up: f64,
    pub gamma_down: f64,
}

impl HeatingChannel {
    /// Equal-rate channel from a heating rate quoted in phonons per second.
    pub fn from_rate_per_second(rate: f64) -> Self {
        let gamma = rate * 1e-6;
        Self { gamma_up: gamma, gamma_down: gamma }
    }

    pub fn is_active(&self) -> bool {
        self.gamma_up != 0.0 || self.gamma_down != 0.0
    }
}

/// Diagnostics accumulated over one propagation call.
#[derive(Debug, Clone, Copy, Default)]
pub struct PropagationStats {
    pub steps: usize,
    /// Largest top-guard-level population seen at substep boundaries.
    pub max_leakage: f64,
}

/// Exact exponential of the stripe-decomposed heating dissipator for one
/// fixed substep dt.  stripe k maps the vector (rho_{i+k,i})_i; the same
/// matrix serves the conjugate stripe.
struct ChannelMap {
    stripes: Vec<Array2<C64>>,
    fock_dim: usize,
}

impl ChannelMap {
    fn build(fock_dim: usize, ch: &HeatingChannel, dt: f64) -> Self {
        let f = fock_dim;
        let gd = ch.gamma_down;
        let gu = ch.gamma_up;
        // (a a^dag)_{jj} on the truncated space: j+1 below the top, 0 at it
        let w = |j: usize| if j + 1 < f { (j + 1) as f64 } else { 0.0 };
        let mut stripes = Vec::with_capacity(f);
        for k in 0..f {
            let len = f - k;
            let mut g = Array2::<f64>::zeros((len, len));
            for i in 0..len {
                let m = i + k;
                g[(i, i)] = -gd * (m + i) as f64 / 2.0 - gu * (w(m) + w(i)) / 2.0;
                if i + 1 < len {
                    g[(i, i + 1)] = gd * (((m + 1) * (i + 1)) as f64).sqrt();
                }
                if i >= 1 {
                    g[(i, i - 1)] = gu * ((m * i) as f64).sqrt();
                }
            }
            let map = expm(&g.mapv(|x| C64::new(x * dt, 0.0)));
            stripes.push(map);
        }
        Self { stripes, fock_dim }
    }

    /// Applies exp(dt D) to rho in place (spin (x) Fock layout).
    fn apply(&self, rho: &mut Array2<C64>) {
        let f = self.fock_dim;
        let mut src = Vec::with_capacity(f);
        let mut dst = vec![C64::new(0.0, 0.0); f];
        for sr in 0..2 {
            for sc in 0..2 {
                let (r0, c0) = (sr * f, sc * f);
                for k in 0..f {
                    let map = &self.stripes[k];
                    let len = f - k;
                    // upper stripe: rho_{r0+i+k, c0+i}
                    src.clear();
                    src.extend((0..len).map(|i| rho[(r0 + i + k, c0 + i)]));
                    for i in 0..len {
                        let mut acc = C64::new(0.0, 0.0);
                        for j in 0..len {
                            acc += map[(i, j)] * src[j];
                        }
                        dst[i] = acc;
                    }
                    for i in 0..len {
                        rho[(r0 + i + k, c0 + i)] = dst[i];
                    }
                    if k == 0 {
                        continue;
                    }
                    // mirror stripe: rho_{r0+i, c0+i+k}
                    src.clear();
                    src.extend((0..len).map(|i| rho[(r0 + i, c0 + i + k)]));
                    for i in 0..len {
                        let mut acc = C64::new(0.0, 0.0);
                        for j in 0..len {
                            acc += map[(i, j)] * src[j];
                        }
                        dst[i] = acc;
                    }
                    for i in 0..len {
                        rho[(r0 + i, c0 + i + k)] = dst[i];
                    }
                }
            }
        }
    }
}

fn check_hermitian(h: &Array2<C64>) -> Result<(), SimError> {
    let dev = hermiticity_deviation(h);
    if dev > 1e-9 {
        return Err(SimError::NonHermitian { dev });
    }
    Ok(())
}

/// One unitary substep rho -> U rho U^dag done in the eigenbasis of H.
fn apply_exponential(rho: &mut Array2<C64>, h: &Array2<C64>, dt: f64) -> Result<(), SimError> {
    let (vals, vecs) = eigh(h)?;
    let vd = dagger(&vecs);
    // rotate into the eigenbasis, phase, rotate back
    let mut tilde = vd.dot(&*rho).dot(&vecs);
    let phases: Vec<C64> = vals.iter().map(|&e| C64::from_polar(1.0, -e * dt)).collect();
    for ((i, j), z) in tilde.indexed_iter_mut() {
        *z *= phases[i] * phases[j].conj();
    }
    *rho = vecs.dot(&tilde).dot(&vd);
    Ok(())
}

/// Gauss-Legendre nodes and weights of the fourth-order commutator-free step.
const CF4_NODE: [f64; 2] = [0.211324865405187, 0.788675134594813]; // 1/2 -+ sqrt(3)/6
const CF4_ALPHA: [f64; 2] = [0.538675134594813, -0.038675134594813]; // 1/4 +- sqrt(3)/6

fn apply_cf4(
    rho: &mut Array2<C64>,
    h: &dyn HamiltonianSource,
    t: f64,
    dt: f64,
) -> Result<(), SimError> {
    let h1 = h.matrix(t + CF4_NODE[0] * dt);
    let h2 = h.matrix(t + CF4_NODE[1] * dt);
    check_hermitian(&h1)?;
    check_hermitian(&h2)?;
    // U = exp(-i dt (a2 H1 + a1 H2)) exp(-i dt (a1 H1 + a2 H2)), rightmost
    // first: the factor weighting the early node more strongly acts first
    let first = h1.mapv(|z| z * CF4_ALPHA[0]) + &h2.mapv(|z| z * CF4_ALPHA[1]);
    let second = h1.mapv(|z| z * CF4_ALPHA[1]) + &h2.mapv(|z| z * CF4_ALPHA[0]);
    apply_exponential(rho, &first, dt)?;
    apply_exponential(rho, &second, dt)?;
    Ok(())
}

/// Propagates `state` in place to global time `t_end`, calling `observer`
/// after every substep (and once at the start) with the current state.
pub fn propagate_observed(
    state: &mut QuantumState,
    h: &dyn HamiltonianSource,
    t_end: f64,
    policy: &StepPolicy,
    channel: Option<&HeatingChannel>,
    mut observer: impl FnMut(&QuantumState),
) -> Result<PropagationStats, SimError> {
    policy.validate()?;
    if h.dim() != state.rho.nrows() {
        return Err(SimError::DimensionMismatch { state: state.rho.nrows(), operator: h.dim() });
    }
    let t0 = state.time;
    if t_end < t0 {
        return Err(SimError::ReversedInterval { t0, t1: t_end });
    }
    let span = t_end - t0;
    let mut stats = PropagationStats::default();
    stats.max_leakage = state.leakage();
    observer(state);
    if span == 0.0 {
        return Ok(stats);
    }

    let dt_eff = policy.effective_dt(h.fastest_angular_frequency());
    let n_steps = (span / dt_eff).ceil().max(1.0) as usize;
    let dt = span / n_steps as f64;

    let active_channel = channel.filter(|c| c.is_active());
    let map = active_channel
        .map(|c| ChannelMap::build(state.space.fock_dim(), c, dt));

    for k in 0..n_steps {
        let t_step = t0 + k as f64 * dt;
        match policy.method {
            StepMethod::PiecewiseExponential => {
                let hm = h.matrix(t_step + dt / 2.0);
                check_hermitian(&hm)?;
                apply_exponential(&mut state.rho, &hm, dt)?;
            }
            StepMethod::FourthOrderMagnus => {
                apply_cf4(&mut state.rho, h, t_step, dt)?;
            }
        }
        if let Some(m) = &map {
            m.apply(&mut state.rho);
        }
        state.time = if k + 1 == n_steps { t_end } else { t_step + dt };
        stats.steps += 1;
        stats.max_leakage = stats.max_leakage.max(state.leakage());
        observer(state);
    }

    if stats.max_leakage > policy.leakage_tolerance {
        return Err(SimError::LeakageExceeded {
            pop: stats.max_leakage,
            tol: policy.leakage_tolerance,
        });
    }
    let trace_dev = state.trace_deviation();
    if trace_dev > 1e-6 {
        return Err(SimError::TraceLost { dev: trace_dev });
    }
    Ok(stats)
}

/// Propagates `state` in place to global time `t_end`.
pub fn propagate(
    state: &mut QuantumState,
    h: &dyn HamiltonianSource,
    t_end: f64,
    policy: &StepPolicy,
    channel: Option<&HeatingChannel>,
) -> Result<PropagationStats, SimError> {
    propagate_observed(state, h, t_end, policy, channel, |_| {})
}

/// Accumulates the unitary propagator U(t0 -> t1) as a matrix (no channel).
pub fn propagator(
    h: &dyn HamiltonianSource,
    t0: f64,
    t1: f64,
    policy: &StepPolicy,
) -> Result<Array2<C64>, SimError> {
    policy.validate()?;
    if t1 < t0 {
        return Err(SimError::ReversedInterval { t0, t1 });
    }
    let dim = h.dim();
    let mut u = Array2::<C64>::eye(dim);
    if t1 == t0 {
        return Ok(u);
    }
    let dt_eff = policy.effective_dt(h.fastest_angular_frequency());
    let n_steps = ((t1 - t0) / dt_eff).ceil().max(1.0) as usize;
    let dt = (t1 - t0) / n_steps as f64;
    for k in 0..n_steps {
        let t_step = t0 + k as f64 * dt;
        let step = match policy.method {
            StepMethod::PiecewiseExponential => {
                let hm = h.matrix(t_step + dt / 2.0);
                check_hermitian(&hm)?;
                crate::linalg::unitary_from_hermitian(&hm, dt)?
            }
            StepMethod::FourthOrderMagnus => {
                let h1 = h.matrix(t_step + CF4_NODE[0] * dt);
                let h2 = h.matrix(t_step + CF4_NODE[1] * dt);
                check_hermitian(&h1)?;
                check_hermitian(&h2)?;
                let first = h1.mapv(|z| z * CF4_ALPHA[0]) + &h2.mapv(|z| z * CF4_ALPHA[1]);
                let second = h1.mapv(|z| z * CF4_ALPHA[1]) + &h2.mapv(|z| z * CF4_ALPHA[0]);
                crate::linalg::unitary_from_hermitian(&second, dt)?
                    .dot(&crate::linalg::unitary_from_hermitian(&first, dt)?)
            }
        };
        u = step.dot(&u);
    }
    Ok(u)
}

/// Mean phonon number over the full simulated space including guards;
/// used by channel tests where the guard exclusion would bias the drift.
pub fn n_bar_full(state: &QuantumState) -> f64 {
    let f = state.space.fock_dim();
    let mut acc = 0.0;
    for s in 0..2 {
        for n in 0..f {
            acc += n as f64 * state.rho[(s * f + n, s * f + n)].re;
        }
    }
    acc
}
