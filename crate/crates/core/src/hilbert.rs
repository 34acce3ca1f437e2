//! Composite spin (x) Fock Hilbert space: truncation bookkeeping, operator
//! construction, partial traces and exact displacement matrix elements.
//!
//! The Fock space keeps `guard_levels` extra levels above `n_max` so that
//! truncation error during propagation lands in the guards instead of
//! corrupting the reported observables.  Observables (populations, n-bar)
//! are evaluated over levels 0..=n_max only; the population of the top
//! guard level is the leakage diagnostic.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use crate::error::SimError;

/// Truncated oscillator space plus guard levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    /// Highest phonon level included in observables.
    pub n_max: usize,
    /// Extra levels kept during propagation, excluded from observables.
    pub guard_levels: usize,
}

impl FockSpace {
    pub fn new(n_max: usize, guard_levels: usize) -> Self {
        Self { n_max, guard_levels }
    }

    /// Number of oscillator levels actually simulated.
    pub fn fock_dim(&self) -> usize {
        self.n_max + self.guard_levels + 1
    }

    /// Dimension of the composite spin (x) Fock space.
    pub fn total_dim(&self) -> usize {
        2 * self.fock_dim()
    }

    /// Flat index of |spin s, phonon n>; spin is the slow index.
    pub fn index(&self, s: usize, n: usize) -> usize {
        debug_assert!(s < 2 && n < self.fock_dim());
        s * self.fock_dim() + n
    }
}

/// Density-matrix state on the composite space, tagged with global time.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub rho: Array2<C64>,
    pub space: FockSpace,
    /// Global laboratory time in us; never reset between engine cycles.
    pub time: f64,
}

impl QuantumState {
    /// Pure product state |spin> (x) |n=phonon>.
    pub fn pure(space: FockSpace, spin: Spin, phonon: usize) -> Self {
        let dim = space.total_dim();
        let mut rho = Array2::zeros((dim, dim));
        let i = space.index(spin as usize, phonon);
        rho[(i, i)] = C64::new(1.0, 0.0);
        Self { rho, space, time: 0.0 }
    }

    /// |down> (x) |0> at t = 0, the engine's start-of-run state.
    pub fn ground(space: FockSpace) -> Self {
        Self::pure(space, Spin::Down, 0)
    }

    pub fn trace(&self) -> C64 {
        self.rho.diag().sum()
    }

    /// Largest deviation from Hermiticity, trace-one and positivity,
    /// reported as (hermiticity dev, |tr - 1|).
    pub fn trace_deviation(&self) -> f64 {
        (self.trace() - C64::new(1.0, 0.0)).norm()
    }

    /// Population of the top guard level (summed over spin).  A space
    /// without guard levels has no truncation probe; this reads zero
    /// there.
    pub fn leakage(&self) -> f64 {
        if self.space.guard_levels == 0 {
            return 0.0;
        }
        let top = self.space.fock_dim() - 1;
        let mut p = 0.0;
        for s in 0..2 {
            let i = self.space.index(s, top);
            p += self.rho[(i, i)].re;
        }
        p
    }

    /// Phonon-number populations p_n for n = 0..=n_max, summed over spin.
    /// Guard levels are excluded by contract.
    pub fn phonon_populations(&self) -> Vec<f64> {
        let f = self.space.fock_dim();
        (0..=self.space.n_max)
            .map(|n| self.rho[(n, n)].re + self.rho[(f + n, f + n)].re)
            .collect()
    }

    /// Mean phonon number over the observable levels 0..=n_max.
    pub fn n_bar(&self) -> f64 {
        self.phonon_populations()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Populations of |down> and |up>, traced over the oscillator.
    pub fn spin_populations(&self) -> (f64, f64) {
        let f = self.space.fock_dim();
        let p_down: f64 = (0..f).map(|n| self.rho[(n, n)].re).sum();
        let p_up: f64 = (0..f).map(|n| self.rho[(f + n, f + n)].re).sum();
        (p_down, p_up)
    }

    /// <op> = tr(rho op) for a Hermitian observable; imaginary part discarded.
    pub fn expectation(&self, op: &Array2<C64>) -> Result<f64, SimError> {
        if op.nrows() != self.rho.nrows() {
            return Err(SimError::DimensionMismatch {
                state: self.rho.nrows(),
                operator: op.nrows(),
            });
        }
        // tr(rho op) = sum_ij rho_ij op_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rho.nrows() {
            for j in 0..self.rho.ncols() {
                acc += self.rho[(i, j)] * op[(j, i)];
            }
        }
        Ok(acc.re)
    }
}

/// Spin basis labels; Down is the ground state and basis index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Down = 0,
    Up = 1,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// sigma_x in the (down, up) basis.
pub fn pauli_x() -> Array2<C64> {
    ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

/// sigma_y = -i(s+ - s-) with s+ = |up><down|; satisfies sx sy = i sz.
pub fn pauli_y() -> Array2<C64> {
    ndarray::arr2(&[[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]])
}

/// sigma_z with sigma_z |up> = +|up>.
pub fn pauli_z() -> Array2<C64> {
    ndarray::arr2(&[[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
}

/// s+ = |up><down|.
pub fn sigma_plus() -> Array2<C64> {
    ndarray::arr2(&[[c(0.0, 0.0), c(0.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

/// Lowering operator a on the truncated Fock space.
pub fn lowering(space: &FockSpace) -> Array2<C64> {
    let f = space.fock_dim();
    let mut a = Array2::zeros((f, f));
    for n in 1..f {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

/// Raising operator a^dagger on the truncated Fock space.
pub fn raising(space: &FockSpace) -> Array2<C64> {
    let mut ad = lowering(space);
    ad.swap_axes(0, 1);
    ad.mapv_inplace(|z| z.conj());
    ad
}

/// Number operator a^dagger a.
pub fn number(space: &FockSpace) -> Array2<C64> {
    let f = space.fock_dim();
    Array2::from_diag(&ndarray::Array1::from_iter((0..f).map(|n| c(n as f64, 0.0))))
}

/// Kronecker product, left factor as the slow index.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            let mut block = out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
            block.assign(&b.mapv(|z| z * aij));
        }
    }
    out
}

/// Frequently used operators embedded in the composite space.
#[derive(Debug, Clone)]
pub struct FullOps {
    pub sx: Array2<C64>,
    pub sy: Array2<C64>,
    pub sz: Array2<C64>,
    /// Quadrature a + a^dagger.
    pub x: Array2<C64>,
    /// sigma_y (x) (a + a^dagger), the spin-dependent-force operator.
    pub sy_x: Array2<C64>,
    pub number: Array2<C64>,
    pub identity: Array2<C64>,
}

impl FullOps {
    pub fn build(space: &FockSpace) -> Self {
        let f = space.fock_dim();
        let id_f = identity(f);
        let id_2 = identity(2);
        let x = &lowering(space) + &raising(space);
        Self {
            sx: kron(&pauli_x(), &id_f),
            sy: kron(&pauli_y(), &id_f),
            sz: kron(&pauli_z(), &id_f),
            sy_x: kron(&pauli_y(), &x),
            x: kron(&id_2, &x),
            number: kron(&id_2, &number(space)),
            identity: identity(2 * f),
        }
    }
}

/// Traces out the spin, returning the oscillator state (fock_dim x fock_dim).
pub fn partial_trace_spin(state: &QuantumState) -> Array2<C64> {
    let f = state.space.fock_dim();
    let mut out = Array2::zeros((f, f));
    for s in 0..2 {
        let block = state.rho.slice(s![s * f..(s + 1) * f, s * f..(s + 1) * f]);
        out = out + &block;
    }
    out
}

/// Traces out the oscillator, returning the 2x2 spin state.
pub fn partial_trace_fock(state: &QuantumState) -> Array2<C64> {
    let f = state.space.fock_dim();
    let mut out = Array2::zeros((2, 2));
    for si in 0..2 {
        for sj in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..f {
                acc += state.rho[(si * f + n, sj * f + n)];
            }
            out[(si, sj)] = acc;
        }
    }
    out
}

/// Exact matrix element <m| exp(i eta (a + a^dagger)) |n>.
///
/// For m >= n this is exp(-eta^2/2) (i eta)^(m-n) sqrt(n!/m!) L_n^(m-n)(eta^2)
/// with the associated Laguerre polynomial L; the matrix is complex symmetric,
/// so the m < n case follows by transposition.  Factorial ratios go through
/// logarithms to stay finite at large m, n.
pub fn displacement_element(m: usize, n: usize, eta: f64) -> C64 {
    let (hi, lo) = if m >= n { (m, n) } else { (n, m) };
    let s = hi - lo;
    let x = eta * eta;
    // log sqrt(lo!/hi!) = -(1/2) sum_{k=lo+1..hi} ln k
    let mut log_ratio = 0.0;
    for k in (lo + 1)..=hi {
        log_ratio -= (k as f64).ln();
    }
    let lag = laguerre(lo, s as f64, x);
    let magnitude = (-0.5 * x + 0.5 * log_ratio).exp() * lag * eta.powi(s as i32);
    // (i)^s cycles through 1, i, -1, -i
    match s % 4 {
        0 => C64::new(magnitude, 0.0),
        1 => C64::new(0.0, magnitude),
        2 => C64::new(-magnitude, 0.0),
        _ => C64::new(0.0, -magnitude),
    }
}

/// Associated Laguerre polynomial L_k^alpha(x) by the three-term recurrence.
fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * l - (jf + alpha) * lm1) / (jf + 1.0);
        lm1 = l;
        l = next;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ladder_algebra() {
        let space = FockSpace::new(6, 2);
        let a = lowering(&space);
        let ad = raising(&space);
        let n = number(&space);
        let ada = ad.dot(&a);
        // a^dagger a equals the number operator everywhere (truncation only
        // affects a a^dagger in the top level)
        for i in 0..space.fock_dim() {
            for j in 0..space.fock_dim() {
                assert_abs_diff_eq!(ada[(i, j)].re, n[(i, j)].re, epsilon = 1e-12);
                assert_abs_diff_eq!(ada[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pauli_algebra_is_right_handed() {
        let sx = pauli_x();
        let sy = pauli_y();
        let sz = pauli_z();
        let prod = sx.dot(&sy);
        for i in 0..2 {
            for j in 0..2 {
                let want = C64::new(0.0, 1.0) * sz[(i, j)];
                assert_abs_diff_eq!(prod[(i, j)].re, want.re, epsilon = 1e-15);
                assert_abs_diff_eq!(prod[(i, j)].im, want.im, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn sigma_y_eigenstate_expectations() {
        // (|down> - i|up>)/sqrt(2) is the +1 eigenstate of sigma_y in this
        // convention; the conjugate phase gives -1.
        let space = FockSpace::new(0, 0);
        let ops = FullOps::build(&space);
        let mut plus = QuantumState::ground(space);
        let amp = 0.5;
        plus.rho[(0, 0)] = C64::new(amp, 0.0);
        plus.rho[(0, 1)] = C64::new(0.0, amp);
        plus.rho[(1, 0)] = C64::new(0.0, -amp);
        plus.rho[(1, 1)] = C64::new(amp, 0.0);
        assert_abs_diff_eq!(plus.expectation(&ops.sy).unwrap(), 1.0, epsilon = 1e-14);
        let mut minus = plus.clone();
        minus.rho[(0, 1)] = C64::new(0.0, -amp);
        minus.rho[(1, 0)] = C64::new(0.0, amp);
        assert_abs_diff_eq!(minus.expectation(&ops.sy).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn spin_force_operator_sparsity() {
        // sigma_y (x) (a + a^dagger) couples only (down,n) <-> (up,n+-1)
        let space = FockSpace::new(3, 0);
        let ops = FullOps::build(&space);
        let f = space.fock_dim();
        for i in 0..2 * f {
            for j in 0..2 * f {
                let (si, ni) = (i / f, i % f);
                let (sj, nj) = (j / f, j % f);
                let coupled = si != sj && (ni as isize - nj as isize).abs() == 1;
                if !coupled {
                    assert_eq!(ops.sy_x[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_like_state() {
        // (|down,0> + |up,1>)/sqrt(2): spin trace leaves diag(1/2, 1/2) on
        // the first two Fock levels
        let space = FockSpace::new(2, 0);
        let mut st = QuantumState::ground(space);
        st.rho.fill(C64::new(0.0, 0.0));
        let i0 = space.index(0, 0);
        let i1 = space.index(1, 1);
        st.rho[(i0, i0)] = C64::new(0.5, 0.0);
        st.rho[(i0, i1)] = C64::new(0.5, 0.0);
        st.rho[(i1, i0)] = C64::new(0.5, 0.0);
        st.rho[(i1, i1)] = C64::new(0.5, 0.0);
        let batt = partial_trace_spin(&st);
        assert_abs_diff_eq!(batt[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(batt[(1, 1)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(batt[(0, 1)].norm(), 0.0, epsilon = 1e-14);
        let spin = partial_trace_fock(&st);
        assert_abs_diff_eq!(spin[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(spin[(1, 1)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(spin[(0, 1)].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(st.n_bar(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn displacement_element_reference_value() {
        // |<1| exp(i eta (a+a^dagger)) |0>| = eta exp(-eta^2/2)
        let eta = 0.1_f64;
        let el = displacement_element(1, 0, eta);
        assert_abs_diff_eq!(el.norm(), eta * (-eta * eta / 2.0).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(el.norm(), 0.09950, epsilon = 5e-6);
        // element is purely imaginary for s = 1
        assert_abs_diff_eq!(el.re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn displacement_elements_match_series_oracle() {
        // independent oracle: truncated Taylor exponential of i eta (a+a^dagger)
        // on a space 20 levels deeper than anything probed
        let eta_values = [0.05, 0.1, 0.2, 0.3];
        let deep = FockSpace::new(39, 0);
        let x = &lowering(&deep) + &raising(&deep);
        for &eta in &eta_values {
            let d = expm(&x.mapv(|z| z * C64::new(0.0, eta)));
            for m in 0..=19 {
                for n in 0..=19 {
                    let got = displacement_element(m, n, eta);
                    let want = d[(m, n)];
                    assert!(
                        (got - want).norm() < 1e-10,
                        "eta={eta} m={m} n={n}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn displacement_matrix_is_symmetric_and_unitary_on_low_levels() {
        let eta = 0.25;
        for m in 0..10 {
            for n in 0..10 {
                let mn = displacement_element(m, n, eta);
                let nm = displacement_element(n, m, eta);
                assert!((mn - nm).norm() < 1e-12);
            }
        }
        // column norms approach 1 when summed far past the probed level
        for n in 0..5 {
            let norm: f64 = (0..60).map(|m| displacement_element(m, n, eta).norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }
}
