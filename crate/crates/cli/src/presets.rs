//! Canned configurations, one per reproduced figure.
//!
//! Frequencies follow the published captions; two figure groups quote
//! slightly different trap frequencies, so each preset carries its own
//! omega_z.  eta = 0.1 and omega_bsb = 0.02 MHz are assumed calibrations
//! (the captions never state them).  cd_scale = 3.37 matches the device's
//! measured counterdiabatic amplitude proportion (2.6% of the carrier,
//! simulated 2.5%) rather than the bare closed form, which lands at 0.74%;
//! see the README for the discrepancy discussion.

use crate::config::{
    EmitConfig, RunConfig, SweepConfig, ThermometryConfig, ThermometrySource,
};

/// Calibration multiplier reproducing the published counterdiabatic
/// amplitude proportion.
pub const DEVICE_CD_SCALE: f64 = 3.37;

pub const PRESET_NAMES: [&str; 9] =
    ["fig2", "fig3", "fig4", "fig5", "figS3", "figS5", "figS6", "figS7", "rwa-check"];

pub fn describe(name: &str) -> Option<&'static str> {
    match name {
        "fig2" => Some("n_bar(N) for N = 1..28, plain and counterdiabatic, with classical lines"),
        "fig3" => Some("work-output enhancement per N against the drive-cost ratio"),
        "fig4" => Some("power over the cycle-time grid 102..119 us at fixed N = 15"),
        "fig5" => Some("power enhancement over cycle time against the drive-cost ratio"),
        "figS3" => Some("counterdiabatic waveform over one cycle and its cost ratios"),
        "figS5" => Some("sideband thermometry of the final battery state, cutoff comparison"),
        "figS6" => Some("single-cycle power over a log tau grid reaching 0.05 us"),
        "figS7" => Some("sigma_y traces along both work strokes at tau = 1 us"),
        "rwa-check" => Some("lab-frame three-tone propagation against the averaged model"),
        _ => None,
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let mut cfg = RunConfig { compare_protocols: true, ..RunConfig::default() };
    cfg.params.cd_scale = DEVICE_CD_SCALE;
    match name {
        "fig2" | "fig3" => {
            cfg.options.heating = true;
            cfg.subtract_heating = true;
            // the heated dephased baselines develop a fat phonon tail by
            // N = 28 and park ~1e-4 in the top guard level; keep the guard
            // meaningful but below the 1e-2 scale these curves resolve
            cfg.integrator.leakage_tolerance = 1e-3;
        }
        "fig4" | "fig5" => {
            cfg.options.heating = true;
            cfg.subtract_heating = true;
            cfg.sweep = SweepConfig::TauUs {
                values: (0..18).map(|i| 102.0 + i as f64).collect(),
                cycles: 15,
            };
        }
        "figS3" => {
            cfg.sweep = SweepConfig::None { cycles: 0 };
            cfg.compare_protocols = false;
            cfg.emit = EmitConfig::Both;
        }
        "figS5" => {
            cfg.options.with_cd = true;
            cfg.options.heating = true;
            cfg.sweep = SweepConfig::None { cycles: 28 };
            cfg.compare_protocols = false;
            cfg.thermometry = Some(ThermometryConfig {
                source: ThermometrySource::Engine,
                forced_cutoffs: vec![9, 19],
                ..ThermometryConfig::default()
            });
        }
        "figS6" => {
            cfg.params.omega_z_mhz = 2.0423;
            cfg.options.heating = true;
            cfg.subtract_heating = true;
            // 24 log-spaced cycle times from 0.05 us into the adiabatic range
            let values = (0..24)
                .map(|i| 0.05 * (119.0_f64 / 0.05).powf(i as f64 / 23.0))
                .collect();
            cfg.sweep = SweepConfig::TauUs { values, cycles: 1 };
            // short cycles need finer slicing than the fig2 default
            cfg.integrator.dt_max_us = 0.002;
            cfg.fock = crate::config::FockConfig { n_max: 14, guard_levels: 5 };
        }
        "figS7" => {
            cfg.params.omega_z_mhz = 2.0423;
            cfg.params.tau_us = 1.0;
            cfg.options.record_traces = true;
            cfg.sweep = SweepConfig::None { cycles: 1 };
            cfg.integrator.dt_max_us = 0.001;
            cfg.fock = crate::config::FockConfig { n_max: 8, guard_levels: 4 };
        }
        "rwa-check" => {
            cfg.params.tau_us = 10.0;
            cfg.rwa_check = true;
            cfg.sweep = SweepConfig::None { cycles: 1 };
            cfg.compare_protocols = false;
            cfg.fock = crate::config::FockConfig { n_max: 8, guard_levels: 4 };
        }
        _ => return None,
    }
    Some(cfg)
}
