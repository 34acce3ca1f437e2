//! Run configuration: a single JSON document covering physics parameters,
//! truncation, cycle options, the sweep axis, and output switches.
//!
//! Every frequency in the file is a plain MHz number and is multiplied by
//! 2*pi on load; rad/us never appears in a config file.  This is the one
//! place where the 2-pi convention is applied.

use otto_core::drive::EngineParams;
use otto_core::dynamics::{HeatingChannel, StepMethod, StepPolicy};
use otto_core::engine::{CycleOptions, ResetVariant};
use otto_core::{mhz_to_rad_per_us, FockSpace};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    /// Carrier Rabi frequency Omega, MHz.
    pub rabi_mhz: f64,
    /// Sweep endpoint v0 of the detuning ramp, MHz.
    pub v0_mhz: f64,
    /// Battery (oscillator) frequency omega, MHz.
    pub omega_mhz: f64,
    /// Trap frequency omega_z used by the lab-frame tones, MHz.
    pub omega_z_mhz: f64,
    /// Lamb-Dicke parameter; an assumed calibration, not a published one.
    pub eta: f64,
    /// Cycle duration, us.
    pub tau_us: f64,
    /// Ambient heating rate, phonons per second.
    pub heating_rate_per_s: f64,
    /// Calibration multiplier on the counterdiabatic amplitude.
    pub cd_scale: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            rabi_mhz: 0.159,
            v0_mhz: 0.075,
            omega_mhz: 0.075,
            omega_z_mhz: 2.0338,
            eta: 0.1,
            tau_us: 119.0,
            heating_rate_per_s: 240.0,
            cd_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockConfig {
    /// Highest observable phonon level.
    pub n_max: usize,
    /// Extra propagation-only levels above n_max.
    pub guard_levels: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self { n_max: 20, guard_levels: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetModeConfig {
    Pump,
    Project,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsConfig {
    pub with_cd: bool,
    pub reset_mode: ResetModeConfig,
    /// Dephase the battery after every cycle (classical baseline).
    pub classical_baseline: bool,
    pub heating: bool,
    pub record_traces: bool,
}

impl Default for OptionsConfig {
    fn default() -> Self {
        Self {
            with_cd: false,
            reset_mode: ResetModeConfig::Pump,
            classical_baseline: false,
            heating: false,
            record_traces: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub dt_max_us: f64,
    pub substeps_per_fastest_period: u32,
    /// "cf4" (commutator-free 4th order) or "midpoint".
    pub method: String,
    pub leakage_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_max_us: 0.09,
            substeps_per_fastest_period: 10,
            method: "cf4".into(),
            leakage_tolerance: 1e-4,
        }
    }
}

/// What the run loops over.  `cycles` runs once up to max(values) and reads
/// the whole n_bar(N) record; `tau_us` runs one engine per grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    Cycles { values: Vec<usize> },
    TauUs { values: Vec<f64>, cycles: usize },
    None { cycles: usize },
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::Cycles { values: (1..=28).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThermometrySource {
    /// Battery populations of the final engine state.
    Engine,
    /// Poisson populations of a coherent state with the given n_bar.
    Coherent,
    /// Geometric populations of a thermal state with the given n_bar.
    Thermal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermometryConfig {
    /// Blue-sideband probe Rabi frequency, MHz; an assumed value.
    pub omega_bsb_mhz: f64,
    pub shots_per_point: u32,
    pub resamples: usize,
    pub source: ThermometrySource,
    /// Target occupation for the synthetic sources.
    pub n_bar: f64,
    /// Extra fixed-cutoff fits run for comparison with the policy fit.
    pub forced_cutoffs: Vec<usize>,
    pub occupation_floor: f64,
}

impl Default for ThermometryConfig {
    fn default() -> Self {
        Self {
            omega_bsb_mhz: 0.02,
            shots_per_point: 200,
            resamples: 200,
            source: ThermometrySource::Coherent,
            n_bar: 2.9,
            forced_cutoffs: Vec::new(),
            occupation_floor: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitConfig {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub fock: FockConfig,
    pub options: OptionsConfig,
    pub integrator: IntegratorConfig,
    pub sweep: SweepConfig,
    pub thermometry: Option<ThermometryConfig>,
    pub seed: u64,
    pub emit: EmitConfig,
    /// Evaluate both the plain protocol and its counterdiabatic variant,
    /// plus the dephased classical baseline of each; used by the figure
    /// presets, which all plot protocol pairs.
    pub compare_protocols: bool,
    /// Subtract heating_rate * N * tau from reported occupations/powers
    /// (emitted alongside the raw values).
    pub subtract_heating: bool,
    /// Propagate one work stroke in the explicit three-tone lab frame and
    /// report its running fidelity against the averaged model instead of
    /// running engine cycles.
    pub rwa_check: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ParamsConfig::default(),
            fock: FockConfig::default(),
            options: OptionsConfig::default(),
            integrator: IntegratorConfig::default(),
            sweep: SweepConfig::default(),
            thermometry: None,
            seed: 7,
            emit: EmitConfig::Both,
            compare_protocols: false,
            subtract_heating: false,
            rwa_check: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

fn err(field: &str, message: String) -> Diagnostic {
    Diagnostic { severity: Severity::Error, field: field.into(), message }
}

fn warn(field: &str, message: String) -> Diagnostic {
    Diagnostic { severity: Severity::Warning, field: field.into(), message }
}

impl RunConfig {
    pub fn engine_params(&self) -> EngineParams {
        let p = &self.params;
        EngineParams {
            rabi: mhz_to_rad_per_us(p.rabi_mhz),
            v0: mhz_to_rad_per_us(p.v0_mhz),
            tau: p.tau_us,
            omega: mhz_to_rad_per_us(p.omega_mhz),
            eta: p.eta,
            omega_z: mhz_to_rad_per_us(p.omega_z_mhz),
            heating_rate: p.heating_rate_per_s,
            cd_scale: p.cd_scale,
        }
    }

    pub fn fock_space(&self) -> FockSpace {
        FockSpace::new(self.fock.n_max, self.fock.guard_levels)
    }

    pub fn step_policy(&self) -> StepPolicy {
        let method = match self.integrator.method.as_str() {
            "midpoint" => StepMethod::PiecewiseExponential,
            _ => StepMethod::FourthOrderMagnus,
        };
        StepPolicy {
            dt_max: self.integrator.dt_max_us,
            substeps_per_fastest_period: self.integrator.substeps_per_fastest_period,
            method,
            leakage_tolerance: self.integrator.leakage_tolerance,
        }
    }

    pub fn cycle_options(&self, with_cd: bool, classical_baseline: bool) -> CycleOptions {
        let reset = match self.options.reset_mode {
            ResetModeConfig::Pump => ResetVariant::Pump,
            ResetModeConfig::Project => ResetVariant::Project,
        };
        CycleOptions {
            with_cd,
            hot_reset: reset,
            cold_reset: reset,
            classical_baseline,
            heating: self
                .options
                .heating
                .then(|| HeatingChannel::from_rate_per_second(self.params.heating_rate_per_s)),
            record_traces: self.options.record_traces,
        }
    }

    pub fn max_cycles(&self) -> usize {
        match &self.sweep {
            SweepConfig::Cycles { values } => values.iter().copied().max().unwrap_or(0),
            SweepConfig::TauUs { cycles, .. } | SweepConfig::None { cycles } => *cycles,
        }
    }

    /// Rough end-of-run occupation used by the truncation and Lamb-Dicke
    /// warnings: the measured per-cycle engine yield at eta = 0.1 scaled
    /// by (eta/0.1)^2, plus the heating drift.
    pub fn expected_n_bar(&self) -> f64 {
        let n = self.max_cycles() as f64;
        let engine = 0.085 * (self.params.eta / 0.1).powi(2) * n;
        let heating = if self.options.heating {
            self.params.heating_rate_per_s * 1e-6 * n * self.params.tau_us
        } else {
            0.0
        };
        engine + heating
    }

    /// All invariant violations and advisory findings, errors first.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let p = &self.params;
        for (field, value) in [
            ("params.rabi_mhz", p.rabi_mhz),
            ("params.v0_mhz", p.v0_mhz),
            ("params.omega_mhz", p.omega_mhz),
            ("params.omega_z_mhz", p.omega_z_mhz),
            ("params.tau_us", p.tau_us),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                out.push(err(field, format!("must be positive and finite, got {value}")));
            }
        }
        if !(p.eta >= 0.0 && p.eta.is_finite()) {
            out.push(err("params.eta", format!("must be >= 0, got {}", p.eta)));
        }
        if p.heating_rate_per_s < 0.0 {
            out.push(err(
                "params.heating_rate_per_s",
                format!("must be >= 0, got {}", p.heating_rate_per_s),
            ));
        }
        if !p.cd_scale.is_finite() {
            out.push(err("params.cd_scale", "must be finite".into()));
        }
        if self.fock.n_max == 0 {
            out.push(err("fock.n_max", "need at least one excitable level".into()));
        }
        if !(self.integrator.dt_max_us > 0.0) {
            out.push(err("integrator.dt_max_us", "must be positive".into()));
        }
        if self.integrator.substeps_per_fastest_period == 0 {
            out.push(err("integrator.substeps_per_fastest_period", "must be >= 1".into()));
        }
        if !["cf4", "midpoint"].contains(&self.integrator.method.as_str()) {
            out.push(err(
                "integrator.method",
                format!("unknown method {:?}; use \"cf4\" or \"midpoint\"", self.integrator.method),
            ));
        }
        match &self.sweep {
            SweepConfig::Cycles { values } => {
                if values.is_empty() {
                    out.push(err("sweep.values", "empty cycle list".into()));
                }
                if values.contains(&0) {
                    out.push(err("sweep.values", "cycle counts start at 1".into()));
                }
                if values.windows(2).any(|w| w[1] <= w[0]) {
                    out.push(err("sweep.values", "cycle list must be strictly increasing".into()));
                }
            }
            SweepConfig::TauUs { values, cycles } => {
                if values.is_empty() {
                    out.push(err("sweep.values", "empty tau grid".into()));
                }
                if values.iter().any(|&t| !(t > 0.0)) {
                    out.push(err("sweep.values", "tau values must be positive".into()));
                }
                if *cycles == 0 {
                    out.push(err("sweep.cycles", "need at least one cycle".into()));
                }
            }
            SweepConfig::None { cycles } => {
                if *cycles == 0 && self.thermometry.is_none() && !self.rwa_check {
                    out.push(warn(
                        "sweep.cycles",
                        "cycles = 0: no engine dynamics, only waveform and cost metrics".into(),
                    ));
                }
            }
        }
        if let Some(th) = &self.thermometry {
            if !(th.omega_bsb_mhz > 0.0) {
                out.push(err("thermometry.omega_bsb_mhz", "must be positive".into()));
            }
            if th.shots_per_point == 0 {
                out.push(err("thermometry.shots_per_point", "must be >= 1".into()));
            }
            if !(0.0..1.0).contains(&th.occupation_floor) {
                out.push(err("thermometry.occupation_floor", "must be in [0, 1)".into()));
            }
            if th.source != ThermometrySource::Engine && !(th.n_bar >= 0.0) {
                out.push(err("thermometry.n_bar", "must be >= 0".into()));
            }
        }

        if p.eta == 0.0 {
            out.push(warn(
                "params.eta",
                "eta = 0 decouples the battery; n_bar stays at the heating drift".into(),
            ));
        }
        let n_exp = self.expected_n_bar();
        let ld = p.eta * p.eta * (2.0 * n_exp + 1.0);
        if ld > 0.1 {
            out.push(warn(
                "params.eta",
                format!(
                    "Lamb-Dicke validity strained: eta^2 (2 n_bar + 1) ~ {ld:.2} > 0.1 \
                     at the expected occupation {n_exp:.1}"
                ),
            ));
        }
        if (self.fock.n_max as f64) < 3.0 * n_exp {
            out.push(warn(
                "fock.n_max",
                format!(
                    "n_max = {} below 3x the expected occupation {n_exp:.1}; \
                     truncation may bite",
                    self.fock.n_max
                ),
            ));
        }
        out.sort_by_key(|d| d.severity != Severity::Error);
        out
    }
}

/// Field-by-field overlay; objects recurse, everything else replaces.
/// A sweep object carrying an `axis` tag replaces wholesale so that
/// switching axes never inherits stale fields of the other variant.
pub fn merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o))
            if !o.contains_key("axis") =>
        {
            for (k, v) in o {
                merge(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}
