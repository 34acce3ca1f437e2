//! Simulation of a single trapped-ion quantum Otto engine that charges a
//! harmonic-oscillator "battery" (a motional mode of the same ion).
//!
//! The working medium is a two-level system driven through repeated
//! Landau-Zener work strokes; energy is deposited into the oscillator
//! through a spin-dependent force modulated at the oscillator frequency.
//! A counterdiabatic (shortcut-to-adiabaticity) term can be switched on to
//! suppress coherent friction at short stroke times.
//!
//! Conventions used throughout:
//! - hbar = 1; angular frequencies in rad/us, times in us.
//! - Composite Hilbert space is spin (x) Fock, spin as the slow index:
//!   basis index `s * fock_dim + n` for spin `s` and phonon number `n`.
//! - Spin basis order is (down, up), i.e. index 0 = |down>, with
//!   sigma_z |up> = +|up>. Right-handed Pauli algebra: sx sy = i sz.
//! - States are density matrices (Hermitian, unit trace, PSD).

extern crate blas_src;

pub mod analysis;
pub mod drive;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod thermometry;

pub use num_complex::Complex64 as C64;

pub use error::SimError;
pub use hilbert::{FockSpace, QuantumState};

/// Converts a laser/trap frequency given in MHz (non-angular) to rad/us.
pub fn mhz_to_rad_per_us(f_mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_mhz
}
