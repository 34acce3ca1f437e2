//! Phonon thermometry on the blue sideband: forward signal synthesis and
//! population extraction by constrained least squares.
//!
//! Driving the blue sideband from |down> produces
//! p_down(t) = sum_n p_n cos^2(Omega_{n+1,n} t), with per-level Rabi
//! frequencies Omega_{n+1,n} = Omega_bsb |<n+1| exp(i eta (a+a^dag)) |n>|.
//! Fitting the measured p_down(t) for the weights p_n is a non-negative
//! least-squares problem with the physical cap sum p_n <= 1.  The fit
//! cutoff is chosen as the smallest one whose fitted total occupation
//! reaches a floor (0.95 by default): pushing the cutoff far beyond the
//! occupied levels makes the design matrix nearly degenerate and inflates
//! the errors without improving the fit.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, LeastSquaresSvd, UPLO};
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::hilbert::displacement_element;

/// Blue-sideband Rabi frequency Omega_{n+1,n} in rad/us.
///
/// `lamb_dicke_approx` replaces the exact displacement element with the
/// leading-order eta sqrt(n+1).
pub fn bsb_rabi_frequency(omega_bsb: f64, eta: f64, n: usize, lamb_dicke_approx: bool) -> f64 {
    if lamb_dicke_approx {
        omega_bsb * eta * ((n + 1) as f64).sqrt()
    } else {
        omega_bsb * displacement_element(n + 1, n, eta).norm()
    }
}

/// Settings of one sideband scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermometryScan {
    /// Bare sideband Rabi frequency Omega_bsb, rad/us.
    pub omega_bsb: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Probe durations, us.
    pub times: Vec<f64>,
    /// Measurement shots per probe duration.
    pub shots_per_point: u32,
    /// Seed of the binomial sampling.
    pub seed: u64,
}

impl ThermometryScan {
    /// Default grid: 60 uniform points covering three periods of the
    /// slowest relevant oscillation, [0, 3 * 2pi / (eta Omega_bsb)].
    pub fn uniform(omega_bsb: f64, eta: f64, shots_per_point: u32, seed: u64) -> Self {
        let t_max = 3.0 * 2.0 * std::f64::consts::PI / (eta * omega_bsb);
        let n = 60;
        let times = (0..n).map(|i| i as f64 * t_max / (n - 1) as f64).collect();
        Self { omega_bsb, eta, times, shots_per_point, seed }
    }

    fn rabi(&self, n: usize, lamb_dicke_approx: bool) -> f64 {
        bsb_rabi_frequency(self.omega_bsb, self.eta, n, lamb_dicke_approx)
    }
}

/// Synthesized scan: the noiseless curve and a finite-shot sample of it.
#[derive(Debug, Clone)]
pub struct BsbSignal {
    pub ideal: Vec<f64>,
    pub sampled: Vec<f64>,
}

/// Forward model of the scan for a given phonon distribution.
///
/// `populations[n]` is the weight of Fock level n.  Probability mass the
/// input does not account for (1 - sum) is placed just above the provided
/// support so that p_down(0) = 1 holds exactly; callers should pass a
/// distribution extending at least ~10 levels past the fit cutoff they
/// intend to use.
pub fn synthesize_signal(populations: &[f64], scan: &ThermometryScan) -> BsbSignal {
    let total: f64 = populations.iter().sum();
    let remainder = (1.0 - total).max(0.0);
    let ideal: Vec<f64> = scan
        .times
        .iter()
        .map(|&t| {
            let mut p = 0.0;
            for (n, &w) in populations.iter().enumerate() {
                p += w * (scan.rabi(n, false) * t).cos().powi(2);
            }
            p + remainder * (scan.rabi(populations.len(), false) * t).cos().powi(2)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(scan.seed);
    let shots = scan.shots_per_point as u64;
    let sampled = ideal
        .iter()
        .map(|&p| {
            let b = Binomial::new(shots, p.clamp(0.0, 1.0)).expect("valid binomial");
            b.sample(&mut rng) as f64 / shots as f64
        })
        .collect();
    BsbSignal { ideal, sampled }
}

/// Optional exponential tail above `start`: p_n = amp * exp(-decay (n -
/// start)) + offset for start < n <= cutoff, cutting the free parameters
/// of a long-tailed fit down to two.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailOptions {
    pub start: usize,
}

/// Fit configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    /// Smallest fitted total occupation that makes a cutoff acceptable.
    pub occupation_floor: f64,
    /// Largest cutoff the automatic policy will try.
    pub max_cutoff: usize,
    /// Fit exactly this cutoff instead of scanning (diagnostics); the
    /// occupation floor is not enforced in this mode.
    pub forced_cutoff: Option<usize>,
    /// Use eta sqrt(n+1) instead of the exact displacement elements.
    pub lamb_dicke_approx: bool,
    /// Automatic cutoffs must also fit the signal: their residual may
    /// exceed the best residual over the scan by at most this factor.
    pub rss_slack: f64,
    pub tail: Option<TailOptions>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            occupation_floor: 0.95,
            max_cutoff: 25,
            forced_cutoff: None,
            lamb_dicke_approx: false,
            rss_slack: 2.0,
            tail: None,
        }
    }
}

/// Fitted exponential-tail parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailFit {
    pub start: usize,
    pub amplitude: f64,
    pub decay: f64,
    pub offset: f64,
}

/// Result of a population fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhononFit {
    /// Highest Fock level included in the fit.
    pub cutoff: usize,
    /// p_n for n = 0..=cutoff (tail expanded when a tail model was used).
    pub populations: Vec<f64>,
    /// Linearized least-squares error of each population (no bounds).
    pub sigma_populations: Vec<f64>,
    pub n_bar: f64,
    /// Linearized least-squares error of n_bar.
    pub sigma_n_bar: f64,
    pub total_occupation: f64,
    /// Residual sum of squares at the solution.
    pub rss: f64,
    pub tail: Option<TailFit>,
}

/// Design matrix: column n is cos^2(Omega_{n+1,n} t_i).
fn design_matrix(scan: &ThermometryScan, cutoff: usize, lamb_dicke_approx: bool) -> Array2<f64> {
    let m = scan.times.len();
    let mut a = Array2::zeros((m, cutoff + 1));
    for n in 0..=cutoff {
        let omega = scan.rabi(n, lamb_dicke_approx);
        for (i, &t) in scan.times.iter().enumerate() {
            a[(i, n)] = (omega * t).cos().powi(2);
        }
    }
    a
}

/// Lawson-Hanson non-negative least squares, min |a x - y| with x >= 0.
fn nnls(a: &Array2<f64>, y: &Array1<f64>) -> Result<Array1<f64>, FitError> {
    let (m, n) = a.dim();
    let mut x = Array1::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let atb_scale = {
        let g = a.t().dot(y);
        g.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0)
    };
    let tol = 1e-12 * atb_scale;

    let solve_passive = |passive: &[bool]| -> Result<Array1<f64>, FitError> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let mut ap = Array2::<f64>::zeros((m, cols.len()));
        for (cj, &j) in cols.iter().enumerate() {
            ap.column_mut(cj).assign(&a.column(j));
        }
        let sol = ap
            .least_squares(y)
            .map_err(|e| FitError::Solver(e.to_string()))?;
        let mut z = Array1::<f64>::zeros(n);
        for (cj, &j) in cols.iter().enumerate() {
            z[j] = sol.solution[cj];
        }
        Ok(z)
    };

    for _outer in 0..(3 * n + 10) {
        // gradient of 1/2 |ax-y|^2 at x, negated
        let residual = y - &a.dot(&x);
        let w = a.t().dot(&residual);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).expect("finite gradient"));
        let Some(j_new) = candidate else { break };
        if w[j_new] <= tol {
            break;
        }
        passive[j_new] = true;

        loop {
            let z = solve_passive(&passive)?;
            let feasible = (0..n).all(|j| !passive[j] || z[j] > 0.0);
            if feasible {
                x = z;
                break;
            }
            // step from x toward z until the first passive variable hits zero
            let mut alpha = 1.0_f64;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    let denom = x[j] - z[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for j in 0..n {
                if passive[j] {
                    x[j] += alpha * (z[j] - x[j]);
                    if x[j] <= 1e-14 {
                        x[j] = 0.0;
                        passive[j] = false;
                    }
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Ok(x)
}

/// NNLS with the extra cap sum(weights . x) <= 1.  The cap is enforced,
/// when active, through a heavily weighted equality row.  The weight
/// must stay moderate: the stopping tolerance scales with |A^T y| of
/// the augmented system, so an oversized weight swamps the data-row
/// gradients and stalls the active set far from the optimum.
fn nnls_capped(
    a: &Array2<f64>,
    y: &Array1<f64>,
    sum_weights: &Array1<f64>,
) -> Result<Array1<f64>, FitError> {
    let x = nnls(a, y)?;
    if sum_weights.dot(&x) <= 1.0 + 1e-9 {
        return Ok(x);
    }
    let (m, n) = a.dim();
    let big = 3e4;
    let mut aug = Array2::<f64>::zeros((m + 1, n));
    aug.slice_mut(ndarray::s![..m, ..]).assign(a);
    for j in 0..n {
        aug[(m, j)] = big * sum_weights[j];
    }
    let mut y_aug = Array1::<f64>::zeros(m + 1);
    y_aug.slice_mut(ndarray::s![..m]).assign(y);
    y_aug[m] = big;
    let mut z = nnls(&aug, &y_aug)?;
    // the penalty leaves a O(1/big^2) overshoot; squeeze it out
    let total = sum_weights.dot(&z);
    if total > 1.0 {
        z.mapv_inplace(|v| v / total);
    }
    Ok(z)
}

/// Linearized covariance of the unconstrained least-squares problem at the
/// fitted cutoff: sigma^2 (A^T A)^-1 with sigma^2 = RSS / (m - k).  Near-
/// degenerate designs produce very large entries here; that is the point
/// of the diagnostic.
fn ls_covariance(a: &Array2<f64>, rss: f64, dof: f64) -> Result<Array2<f64>, FitError> {
    let ata = a.t().dot(a);
    let (vals, vecs) = ata
        .eigh(UPLO::Lower)
        .map_err(|e| FitError::Solver(e.to_string()))?;
    let vmax = vals.iter().fold(0.0_f64, |acc, &v| acc.max(v));
    let floor = vmax.max(1e-300) * 1e-15;
    let sigma2 = rss.max(0.0) / dof.max(1.0);
    let k = vals.len();
    let mut cov = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            let mut acc = 0.0;
            for l in 0..k {
                acc += vecs[(i, l)] * vecs[(j, l)] / vals[l].max(floor);
            }
            cov[(i, j)] = sigma2 * acc;
        }
    }
    Ok(cov)
}

struct CutoffFit {
    populations: Vec<f64>,
    rss: f64,
    tail: Option<TailFit>,
    /// Full design at this cutoff (per-level columns), for the covariance.
    design: Array2<f64>,
}

/// Fit at one fixed cutoff, optionally with the exponential tail model.
fn fit_at_cutoff(
    scan: &ThermometryScan,
    y: &Array1<f64>,
    cutoff: usize,
    options: &FitOptions,
) -> Result<CutoffFit, FitError> {
    let a = design_matrix(scan, cutoff, options.lamb_dicke_approx);
    let use_tail = options
        .tail
        .filter(|t| t.start + 1 < cutoff)
        .map(|t| t.start);

    let Some(start) = use_tail else {
        let ones = Array1::from_elem(cutoff + 1, 1.0);
        let x = nnls_capped(&a, y, &ones)?;
        let rss = {
            let r = y - &a.dot(&x);
            r.dot(&r)
        };
        return Ok(CutoffFit { populations: x.to_vec(), rss, tail: None, design: a });
    };

    // tail model: free levels 0..=start plus amplitude and offset columns
    // for the exponential region; the decay constant is scanned on a grid
    // and refined around the best residual
    let m = scan.times.len();
    let tail_levels: Vec<usize> = (start + 1..=cutoff).collect();
    let build = |decay: f64| -> (Array2<f64>, Array1<f64>) {
        let k = start + 1;
        let mut at = Array2::<f64>::zeros((m, k + 2));
        at.slice_mut(ndarray::s![.., ..k]).assign(&a.slice(ndarray::s![.., ..k]));
        let mut weights = Array1::<f64>::zeros(k + 2);
        for j in 0..k {
            weights[j] = 1.0;
        }
        for &n in &tail_levels {
            let shape = (-decay * (n - start) as f64).exp();
            for i in 0..m {
                at[(i, k)] += shape * a[(i, n)];
                at[(i, k + 1)] += a[(i, n)];
            }
            weights[k] += shape;
            weights[k + 1] += 1.0;
        }
        (at, weights)
    };
    let evaluate = |decay: f64| -> Result<(f64, Array1<f64>), FitError> {
        let (at, weights) = build(decay);
        let x = nnls_capped(&at, y, &weights)?;
        let r = y - &at.dot(&x);
        Ok((r.dot(&r), x))
    };
    let grid: Vec<f64> = (0..24).map(|i| 0.05 * 1.35_f64.powi(i)).collect();
    let mut best = (f64::INFINITY, 0.0, Array1::zeros(0));
    for &b in &grid {
        let (rss, x) = evaluate(b)?;
        if rss < best.0 {
            best = (rss, b, x);
        }
    }
    // golden-section refinement around the best grid point
    let (mut lo, mut hi) = (best.1 / 1.35, best.1 * 1.35);
    for _ in 0..25 {
        let m1 = lo + 0.382 * (hi - lo);
        let m2 = lo + 0.618 * (hi - lo);
        let (r1, x1) = evaluate(m1)?;
        let (r2, x2) = evaluate(m2)?;
        if r1 < r2 {
            hi = m2;
            if r1 < best.0 {
                best = (r1, m1, x1);
            }
        } else {
            lo = m1;
            if r2 < best.0 {
                best = (r2, m2, x2);
            }
        }
    }
    let (rss, decay, x) = best;
    let k = start + 1;
    let (amp, offset) = (x[k], x[k + 1]);
    let mut populations = vec![0.0; cutoff + 1];
    populations[..k].copy_from_slice(&x.as_slice().expect("contiguous")[..k]);
    for &n in &tail_levels {
        populations[n] = amp * (-decay * (n - start) as f64).exp() + offset;
    }
    Ok(CutoffFit {
        populations,
        rss,
        tail: Some(TailFit { start, amplitude: amp, decay, offset }),
        design: a,
    })
}

/// Fits phonon populations to a measured scan.
///
/// The cutoff policy fits every n_max = 0..=max_cutoff and keeps the
/// lowest whose total occupation reaches `occupation_floor` AND whose
/// residual is within `rss_slack` of the best over the whole scan.  The
/// floor alone under-selects: a small cutoff absorbs the unresolved
/// tail into its few levels, clearing the floor while fitting the
/// signal badly.  A forced cutoff skips the policy.  Population errors
/// come from the linearized least-squares covariance at the chosen
/// cutoff.
pub fn fit_populations(
    signal: &[f64],
    scan: &ThermometryScan,
    options: &FitOptions,
) -> Result<PhononFit, FitError> {
    if signal.len() != scan.times.len() {
        return Err(FitError::LengthMismatch { times: scan.times.len(), values: signal.len() });
    }
    if signal.len() < 4 {
        return Err(FitError::TooFewPoints { needed: 4, got: signal.len() });
    }
    if !(0.0..1.0).contains(&options.occupation_floor) {
        return Err(FitError::BadParameter(format!(
            "occupation floor must be in [0, 1), got {}",
            options.occupation_floor
        )));
    }
    let y = Array1::from_iter(signal.iter().copied());

    let chosen: Option<(usize, CutoffFit)> = match options.forced_cutoff {
        Some(cutoff) => Some((cutoff, fit_at_cutoff(scan, &y, cutoff, options)?)),
        None => {
            let mut fits = Vec::with_capacity(options.max_cutoff + 1);
            let mut rss_min = f64::INFINITY;
            for cutoff in 0..=options.max_cutoff {
                let fit = fit_at_cutoff(scan, &y, cutoff, options)?;
                rss_min = rss_min.min(fit.rss);
                fits.push(fit);
            }
            // absolute allowance keeps noiseless data (rss ~ 0) from
            // demanding bit-exact residual ties
            let ceiling = (options.rss_slack * rss_min).max(rss_min + 1e-9);
            fits.into_iter().enumerate().find(|(_, fit)| {
                let occ: f64 = fit.populations.iter().sum();
                occ >= options.occupation_floor && fit.rss <= ceiling
            })
        }
    };
    let Some((cutoff, fit)) = chosen else {
        return Err(FitError::NoFeasibleCutoff {
            max_cutoff: options.max_cutoff,
            floor: options.occupation_floor,
        });
    };

    let m = scan.times.len() as f64;
    let k = (cutoff + 1) as f64;
    let cov = ls_covariance(&fit.design, fit.rss, m - k)?;
    let sigma_populations: Vec<f64> =
        (0..=cutoff).map(|n| cov[(n, n)].max(0.0).sqrt()).collect();
    let mut var_nbar = 0.0;
    for i in 0..=cutoff {
        for j in 0..=cutoff {
            var_nbar += i as f64 * j as f64 * cov[(i, j)];
        }
    }
    let n_bar = fit
        .populations
        .iter()
        .enumerate()
        .map(|(n, &p)| n as f64 * p)
        .sum();
    Ok(PhononFit {
        cutoff,
        total_occupation: fit.populations.iter().sum(),
        populations: fit.populations,
        sigma_populations,
        n_bar,
        sigma_n_bar: var_nbar.max(0.0).sqrt(),
        rss: fit.rss,
        tail: fit.tail,
    })
}

/// Bootstrap errors of a fit: per-point Gaussian resampling with the
/// binomial standard deviation, refit at the same cutoff, spread over
/// resamples.  Resamples are seeded individually from `seed`, so the
/// result does not depend on thread scheduling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapErrors {
    pub sigma_populations: Vec<f64>,
    pub sigma_n_bar: f64,
    pub resamples_used: usize,
    pub failures: usize,
}

pub fn bootstrap_errors(
    signal: &[f64],
    scan: &ThermometryScan,
    fit: &PhononFit,
    options: &FitOptions,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapErrors, FitError> {
    if signal.len() != scan.times.len() {
        return Err(FitError::LengthMismatch { times: scan.times.len(), values: signal.len() });
    }
    let shots = scan.shots_per_point.max(1) as f64;
    let refit_options = FitOptions { forced_cutoff: Some(fit.cutoff), ..options.clone() };
    let samples: Vec<Result<PhononFit, FitError>> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64 + 1));
            let resampled: Vec<f64> = signal
                .iter()
                .map(|&p| {
                    let sd = (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / shots).sqrt();
                    let noise: f64 = Normal::new(0.0, sd.max(1e-300))
                        .expect("valid normal")
                        .sample(&mut rng);
                    p + noise
                })
                .collect();
            fit_populations(&resampled, scan, &refit_options)
        })
        .collect();

    let mut ok: Vec<&PhononFit> = Vec::with_capacity(resamples);
    let mut failures = 0;
    for s in &samples {
        match s {
            Ok(f) => ok.push(f),
            Err(_) => failures += 1,
        }
    }
    if ok.len() < 2 {
        return Err(FitError::Solver(format!(
            "bootstrap produced {} usable fits out of {resamples}",
            ok.len()
        )));
    }
    let count = ok.len() as f64;
    let levels = fit.populations.len();
    let mut sigma_populations = vec![0.0; levels];
    for n in 0..levels {
        let mean: f64 = ok.iter().map(|f| f.populations[n]).sum::<f64>() / count;
        let var: f64 = ok
            .iter()
            .map(|f| (f.populations[n] - mean).powi(2))
            .sum::<f64>()
            / (count - 1.0);
        sigma_populations[n] = var.sqrt();
    }
    let mean_nbar: f64 = ok.iter().map(|f| f.n_bar).sum::<f64>() / count;
    let var_nbar: f64 =
        ok.iter().map(|f| (f.n_bar - mean_nbar).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(BootstrapErrors {
        sigma_populations,
        sigma_n_bar: var_nbar.sqrt(),
        resamples_used: ok.len(),
        failures,
    })
}

/// Lowest cutoff whose cumulative occupation of a KNOWN distribution
/// clears `floor`: the simulation-grounded counterpart of the fitted
/// occupancy policy, used when the source state is available.
pub fn occupancy_cutoff(populations: &[f64], floor: f64) -> usize {
    let mut acc = 0.0;
    for (n, &p) in populations.iter().enumerate() {
        acc += p;
        if acc >= floor {
            return n;
        }
    }
    populations.len().saturating_sub(1)
}

/// Normalized thermal distribution with mean occupation `n_bar` on levels
/// 0..=top.
pub fn thermal_populations(n_bar: f64, top: usize) -> Vec<f64> {
    assert!(n_bar >= 0.0);
    if n_bar == 0.0 {
        let mut p = vec![0.0; top + 1];
        p[0] = 1.0;
        return p;
    }
    let q = n_bar / (n_bar + 1.0);
    let mut p: Vec<f64> = (0..=top).map(|n| q.powi(n as i32)).collect();
    let norm: f64 = p.iter().sum();
    for v in &mut p {
        *v /= norm;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn default_scan(seed: u64) -> ThermometryScan {
        let omega_bsb = crate::mhz_to_rad_per_us(0.02);
        ThermometryScan::uniform(omega_bsb, 0.1, 200, seed)
    }

    #[test]
    fn bsb_frequency_low_level_values() {
        let omega_bsb = crate::mhz_to_rad_per_us(0.02);
        let eta = 0.1;
        let exact = bsb_rabi_frequency(omega_bsb, eta, 0, false);
        let ld = bsb_rabi_frequency(omega_bsb, eta, 0, true);
        assert_abs_diff_eq!(ld, omega_bsb * eta, epsilon = 1e-15);
        // exact element carries exp(-eta^2/2)
        assert_abs_diff_eq!(exact, ld * (-eta * eta / 2.0).exp(), epsilon = 1e-12);
        // frequencies grow with n and stay distinct in the fitted range
        let mut prev = 0.0;
        for n in 0..25 {
            let f = bsb_rabi_frequency(omega_bsb, eta, n, false);
            assert!(f > prev, "frequencies must be distinct/increasing at n={n}");
            prev = f;
        }
    }

    #[test]
    fn signal_at_time_zero_is_unity() {
        let scan = default_scan(7);
        let sig = synthesize_signal(&[0.5, 0.3, 0.2], &scan);
        assert_abs_diff_eq!(sig.ideal[0], 1.0, epsilon = 1e-14);
        // sub-normalized input: the remainder contributes too
        let sig2 = synthesize_signal(&[0.5, 0.3], &scan);
        assert_abs_diff_eq!(sig2.ideal[0], 1.0, epsilon = 1e-14);
        for &p in &sig.ideal {
            assert!((0.0..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let scan = default_scan(42);
        let a = synthesize_signal(&[0.6, 0.4], &scan);
        let b = synthesize_signal(&[0.6, 0.4], &scan);
        assert_eq!(a.sampled, b.sampled);
        let scan2 = ThermometryScan { seed: 43, ..scan };
        let c = synthesize_signal(&[0.6, 0.4], &scan2);
        assert_ne!(a.sampled, c.sampled);
    }

    #[test]
    fn sampling_error_shrinks_with_shots() {
        // RMS deviation from the ideal curve scales as 1/sqrt(shots)
        let p = [0.5, 0.3, 0.2];
        let rms = |shots: u32| {
            let mut scan = default_scan(11);
            scan.shots_per_point = shots;
            let sig = synthesize_signal(&p, &scan);
            let acc: f64 = sig
                .sampled
                .iter()
                .zip(&sig.ideal)
                .map(|(s, i)| (s - i).powi(2))
                .sum();
            (acc / sig.ideal.len() as f64).sqrt()
        };
        let coarse = rms(100);
        let fine = rms(10000);
        let ratio = coarse / fine;
        assert!(
            ratio > 5.0 && ratio < 20.0,
            "expected ~10x shrink from 100x shots, got {ratio:.1}"
        );
    }

    #[test]
    fn noiseless_roundtrip_recovers_planted_populations() {
        let scan = default_scan(0);
        let planted = [0.5, 0.3, 0.2];
        let sig = synthesize_signal(&planted, &scan);
        // noiseless data supports a strict floor; the policy then walks to
        // the exact support and the fit is exact
        let strict = FitOptions { occupation_floor: 1.0 - 1e-9, ..FitOptions::default() };
        let fit = fit_populations(&sig.ideal, &scan, &strict).unwrap();
        assert_eq!(fit.cutoff, 2);
        for (n, &want) in planted.iter().enumerate() {
            assert_abs_diff_eq!(fit.populations[n], want, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(fit.n_bar, 0.7, epsilon = 1e-6);
        assert!(fit.rss < 1e-12);
        // cutoff 1 clears the 0.95 floor by absorbing the tail, but its
        // residual disqualifies it; the default policy lands on the
        // exact support
        let loose = fit_populations(&sig.ideal, &scan, &FitOptions::default()).unwrap();
        assert_eq!(loose.cutoff, 2);
        assert_abs_diff_eq!(loose.n_bar, 0.7, epsilon = 1e-6);
    }

    #[test]
    fn cutoff_policy_is_minimal_under_floor_and_residual() {
        let scan = default_scan(3);
        // thermal-ish state spread over many levels
        let planted = thermal_populations(2.9, 40);
        let sig = synthesize_signal(&planted, &scan);
        let options = FitOptions::default();
        let fit = fit_populations(&sig.ideal, &scan, &options).unwrap();
        assert!(fit.total_occupation >= 0.95);
        // every smaller cutoff misses the floor or fits worse than the
        // policy slack allows
        let mut rss_min = f64::INFINITY;
        let mut fits = Vec::new();
        for c in 0..=options.max_cutoff {
            let f = fit_populations(
                &sig.ideal,
                &scan,
                &FitOptions { forced_cutoff: Some(c), ..options.clone() },
            )
            .unwrap();
            rss_min = rss_min.min(f.rss);
            fits.push(f);
        }
        let ceiling = (options.rss_slack * rss_min).max(rss_min + 1e-9);
        for f in &fits[..fit.cutoff] {
            assert!(
                f.total_occupation < options.occupation_floor || f.rss > ceiling,
                "cutoff {} should have been rejected",
                f.cutoff
            );
        }
        assert!(fits[fit.cutoff].total_occupation >= options.occupation_floor);
        assert!(fits[fit.cutoff].rss <= ceiling);
    }

    #[test]
    fn forced_cutoff_skips_the_floor() {
        let scan = default_scan(5);
        let planted = thermal_populations(2.9, 40);
        let sig = synthesize_signal(&planted, &scan);
        let fit = fit_populations(
            &sig.ideal,
            &scan,
            &FitOptions { forced_cutoff: Some(2), ..FitOptions::default() },
        )
        .unwrap();
        assert_eq!(fit.cutoff, 2);
        assert!(fit.total_occupation < 0.95);
    }

    #[test]
    fn fitted_populations_are_nonnegative_and_capped() {
        let scan = default_scan(19);
        let planted = thermal_populations(1.7, 30);
        let sig = synthesize_signal(&planted, &scan);
        let fit = fit_populations(&sig.sampled, &scan, &FitOptions::default()).unwrap();
        for &p in &fit.populations {
            assert!(p >= 0.0);
        }
        assert!(fit.total_occupation <= 1.0 + 1e-6);
    }

    #[test]
    fn tail_model_reduces_parameters_but_tracks_the_distribution() {
        let scan = default_scan(23);
        let planted = thermal_populations(2.9, 40);
        let sig = synthesize_signal(&planted, &scan);
        let fit = fit_populations(
            &sig.ideal,
            &scan,
            &FitOptions {
                forced_cutoff: Some(14),
                tail: Some(TailOptions { start: 4 }),
                ..FitOptions::default()
            },
        )
        .unwrap();
        let tail = fit.tail.expect("tail fit present");
        assert_eq!(tail.start, 4);
        assert!(tail.amplitude >= 0.0);
        assert!(tail.offset >= 0.0);
        // thermal tail decays like exp(-n ln((n+1)/n)): decay ~ 0.296
        assert_abs_diff_eq!(fit.n_bar, 2.9, epsilon = 0.25);
    }

    #[test]
    fn bootstrap_is_deterministic_and_scales_with_noise() {
        let scan = default_scan(31);
        let planted = thermal_populations(1.2, 25);
        let sig = synthesize_signal(&planted, &scan);
        let fit = fit_populations(&sig.sampled, &scan, &FitOptions::default()).unwrap();
        let b1 = bootstrap_errors(&sig.sampled, &scan, &fit, &FitOptions::default(), 60, 9).unwrap();
        let b2 = bootstrap_errors(&sig.sampled, &scan, &fit, &FitOptions::default(), 60, 9).unwrap();
        assert_eq!(b1.sigma_n_bar, b2.sigma_n_bar);
        assert!(b1.sigma_n_bar > 0.0);
        assert_eq!(b1.failures, 0);
    }

    #[test]
    fn thermal_distribution_mean_matches_label() {
        let p = thermal_populations(2.9, 80);
        let nbar: f64 = p.iter().enumerate().map(|(n, &w)| n as f64 * w).sum();
        assert_abs_diff_eq!(nbar, 2.9, epsilon = 1e-6);
        let total: f64 = p.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn occupancy_cutoff_finds_the_crossing() {
        assert_eq!(occupancy_cutoff(&[0.5, 0.3, 0.2], 0.95), 2);
        assert_eq!(occupancy_cutoff(&[0.96, 0.04], 0.95), 0);
        // thermal 2.9: 1 - (2.9/3.9)^(k+1) crosses 0.95 at k = 10
        assert_eq!(occupancy_cutoff(&thermal_populations(2.9, 40), 0.95), 10);
        // floor unreachable: saturates at the top level
        assert_eq!(occupancy_cutoff(&[0.2, 0.2], 0.95), 1);
    }
}
