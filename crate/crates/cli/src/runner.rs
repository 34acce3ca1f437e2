//! Executes a validated configuration: engine sweeps, thermometry, the
//! lab-frame consistency check, and deterministic file emission.
//!
//! Determinism contract: equal config + seed produces byte-identical CSV
//! and JSON files.  Floats are written with Rust's shortest-roundtrip
//! formatting, sweep results are merged by index (never by completion
//! order), and the wall-clock timestamp lives in its own file so that
//! every other artifact can be compared bytewise.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use otto_core::analysis::{
    cd_cost_ratio_amplitude, cd_cost_ratio_intensity, charging_power, enhancement_ratio,
    subtract_heating,
};
use otto_core::drive::{
    cd_cost_closed_form, omega_cd, standard_tones, v_of_t, InteractionHamiltonian,
    LabFrameHamiltonian,
};
use otto_core::dynamics::propagate;
use otto_core::engine::{run_cycles, CycleRecord, StrokeTrace};
use otto_core::thermometry::{
    bootstrap_errors, fit_populations, synthesize_signal, thermal_populations, FitOptions,
    PhononFit, ThermometryScan,
};
use otto_core::{mhz_to_rad_per_us, QuantumState, SimError};

use crate::config::{EmitConfig, RunConfig, Severity, SweepConfig, ThermometrySource};

#[derive(Debug)]
pub enum CliError {
    /// Unusable configuration; exit code 2.
    Config(String),
    /// Leakage, convergence, or fit failure; exit code 3.
    Numerics(String),
    /// Filesystem trouble; exit code 3.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerics(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerics(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Numerics(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// One emitted sweep point of one curve.
#[derive(Debug, Clone, Serialize)]
struct CurvePoint {
    curve: String,
    cycles: usize,
    tau_us: f64,
    with_cd: bool,
    dephased: bool,
    n_bar: f64,
    n_bar_heating_subtracted: f64,
    power_phonons_per_us: f64,
    power_heating_subtracted: f64,
    /// omega * n_bar, energy in rad/us units.
    work_energy: f64,
    /// N * n_bar(first requested N) reference.
    classical_line: f64,
}

pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

struct Emitter {
    dir: PathBuf,
    emit: EmitConfig,
    files: Vec<String>,
}

impl Emitter {
    fn new(dir: &Path, emit: EmitConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), emit, files: Vec::new() })
    }

    fn want_csv(&self) -> bool {
        matches!(self.emit, EmitConfig::Csv | EmitConfig::Both)
    }

    fn want_json(&self) -> bool {
        matches!(self.emit, EmitConfig::Json | EmitConfig::Both)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if !self.want_csv() {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in rows {
            w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        if !self.want_json() {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut buf = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        buf.push(b'\n');
        fs::write(&path, buf)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Engine run variants of one configuration; label doubles as file stem.
#[derive(Clone, Copy)]
struct Variant {
    label: &'static str,
    with_cd: bool,
    dephased: bool,
}

fn variants(cfg: &RunConfig) -> Vec<Variant> {
    if cfg.compare_protocols {
        vec![
            Variant { label: "na", with_cd: false, dephased: false },
            Variant { label: "sta", with_cd: true, dephased: false },
            Variant { label: "na_dephased", with_cd: false, dephased: true },
            Variant { label: "sta_dephased", with_cd: true, dephased: true },
        ]
    } else {
        vec![Variant {
            label: if cfg.options.with_cd { "sta" } else { "na" },
            with_cd: cfg.options.with_cd,
            dephased: cfg.options.classical_baseline,
        }]
    }
}

pub fn execute(
    cfg: &RunConfig,
    preset: Option<&str>,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<RunSummary, CliError> {
    let diags = cfg.validate();
    let errors: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
    if !errors.is_empty() {
        return Err(CliError::Config(
            serde_json::to_string(&errors).unwrap_or_else(|_| format!("{errors:?}")),
        ));
    }
    let warnings: Vec<String> = diags
        .iter()
        .filter(|d| d.severity == Severity::Warning)
        .map(|d| format!("{}: {}", d.field, d.message))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut em = Emitter::new(out_dir, cfg.emit)?;
    let mut metrics: Vec<serde_json::Value> = Vec::new();

    if cfg.rwa_check {
        run_rwa_check(cfg, &mut em, &mut metrics)?;
    } else {
        pool.install(|| run_engine(cfg, &mut em, &mut metrics))?;
    }
    emit_waveform_and_cost(cfg, &mut em, &mut metrics)?;

    if em.want_json() {
        let v = serde_json::Value::Array(metrics);
        em.json("metrics.json", &v)?;
    }
    em.text("schema.txt", SCHEMA_NOTES)?;

    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "preset": preset,
        "seed": cfg.seed,
        "config": serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?,
        "files": em.files,
    });
    em.json("manifest.json", &manifest)?;
    // wall clock lives outside the deterministic artifact set
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    em.text("timestamp.txt", &format!("unix_seconds {now}\n"))?;

    Ok(RunSummary { out_dir: out_dir.to_path_buf(), files: em.files, warnings })
}

fn run_engine(
    cfg: &RunConfig,
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
) -> Result<(), CliError> {
    let params = cfg.engine_params();
    let space = cfg.fock_space();
    let policy = cfg.step_policy();
    let rate_per_us = if cfg.options.heating { cfg.params.heating_rate_per_s * 1e-6 } else { 0.0 };

    let vars = variants(cfg);
    match &cfg.sweep {
        SweepConfig::Cycles { values } => {
            let max_n = *values.last().expect("validated non-empty");
            let records: Vec<Result<CycleRecord, SimError>> = vars
                .par_iter()
                .map(|v| {
                    let opts = cfg.cycle_options(v.with_cd, v.dephased);
                    run_cycles(space, &params, &opts, max_n, &policy, None)
                })
                .collect();
            let mut curves = Vec::new();
            for (v, rec) in vars.iter().zip(records) {
                let rec = rec?;
                let first = rec.n_bar[values[0] - 1] / values[0] as f64;
                let points: Vec<CurvePoint> = values
                    .iter()
                    .map(|&n| {
                        point(v, n, cfg.params.tau_us, rec.n_bar[n - 1], rate_per_us, &params, first)
                    })
                    .collect();
                emit_curve(em, metrics, cfg, &points)?;
                emit_traces(em, v, &rec.traces)?;
                curves.push((v, rec, points));
            }
            emit_enhancement(em, metrics, cfg, &curves)?;
            run_thermometry(cfg, em, metrics, curves.iter().map(|c| &c.1))?;
        }
        SweepConfig::TauUs { values, cycles } => {
            let mut tasks = Vec::new();
            for v in &vars {
                for &tau in values {
                    tasks.push((*v, tau));
                }
            }
            let results: Vec<Result<CycleRecord, SimError>> = tasks
                .par_iter()
                .map(|(v, tau)| {
                    let p = otto_core::drive::EngineParams { tau: *tau, ..params };
                    let opts = cfg.cycle_options(v.with_cd, v.dephased);
                    run_cycles(space, &p, &opts, *cycles, &policy, None)
                })
                .collect();
            let mut curves = Vec::new();
            for (vi, v) in vars.iter().enumerate() {
                let mut points = Vec::new();
                let mut recs = Vec::new();
                for (ti, &tau) in values.iter().enumerate() {
                    let rec = match &results[vi * values.len() + ti] {
                        Ok(r) => r.clone(),
                        Err(e) => return Err(CliError::Numerics(e.to_string())),
                    };
                    let n_bar = *rec.n_bar.last().expect("cycles >= 1");
                    points.push(point(v, *cycles, tau, n_bar, rate_per_us, &params, f64::NAN));
                    recs.push(rec);
                }
                emit_curve(em, metrics, cfg, &points)?;
                curves.push((v, recs, points));
            }
            emit_power_enhancement(em, metrics, cfg, &curves)?;
        }
        SweepConfig::None { cycles } => {
            if *cycles == 0 {
                run_thermometry(cfg, em, metrics, std::iter::empty())?;
                return Ok(());
            }
            let records: Vec<Result<CycleRecord, SimError>> = vars
                .par_iter()
                .map(|v| {
                    let opts = cfg.cycle_options(v.with_cd, v.dephased);
                    run_cycles(space, &params, &opts, *cycles, &policy, None)
                })
                .collect();
            let mut curves = Vec::new();
            for (v, rec) in vars.iter().zip(records) {
                let rec = rec?;
                let n_bar = *rec.n_bar.last().expect("cycles >= 1");
                let pt = point(v, *cycles, cfg.params.tau_us, n_bar, rate_per_us, &params, f64::NAN);
                emit_curve(em, metrics, cfg, &[pt])?;
                emit_traces(em, v, &rec.traces)?;
                curves.push((v, rec));
            }
            run_thermometry(cfg, em, metrics, curves.iter().map(|c| &c.1))?;
        }
    }
    Ok(())
}

fn point(
    v: &Variant,
    cycles: usize,
    tau: f64,
    n_bar: f64,
    rate_per_us: f64,
    params: &otto_core::drive::EngineParams,
    n_bar_per_cycle_first: f64,
) -> CurvePoint {
    let subtracted = subtract_heating(n_bar, cycles, tau, rate_per_us);
    CurvePoint {
        curve: v.label.to_string(),
        cycles,
        tau_us: tau,
        with_cd: v.with_cd,
        dephased: v.dephased,
        n_bar,
        n_bar_heating_subtracted: subtracted,
        power_phonons_per_us: charging_power(n_bar, cycles, tau),
        power_heating_subtracted: subtracted / (cycles as f64 * tau),
        work_energy: params.omega * n_bar,
        classical_line: n_bar_per_cycle_first * cycles as f64,
    }
}

fn emit_curve(
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
    cfg: &RunConfig,
    points: &[CurvePoint],
) -> Result<(), CliError> {
    let name = format!("curve_{}.csv", points[0].curve);
    let header = [
        "cycles",
        "tau_us",
        "with_cd",
        "dephased",
        "n_bar",
        "n_bar_heating_subtracted",
        "power_phonons_per_us",
        "power_heating_subtracted",
        "work_energy",
        "classical_line",
    ];
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.cycles.to_string(),
                fmt(p.tau_us),
                p.with_cd.to_string(),
                p.dephased.to_string(),
                fmt(p.n_bar),
                fmt(p.n_bar_heating_subtracted),
                fmt(p.power_phonons_per_us),
                fmt(p.power_heating_subtracted),
                fmt(p.work_energy),
                fmt(p.classical_line),
            ]
        })
        .collect();
    em.csv(&name, &header, &rows)?;
    for p in points {
        let mut rec = serde_json::to_value(p).map_err(|e| CliError::Io(e.to_string()))?;
        let obj = rec.as_object_mut().expect("struct serializes to object");
        obj.insert("seed".into(), json!(cfg.seed));
        metrics.push(rec);
    }
    Ok(())
}

fn emit_traces(em: &mut Emitter, v: &Variant, traces: &[StrokeTrace]) -> Result<(), CliError> {
    if traces.is_empty() {
        return Ok(());
    }
    let name = format!("trace_{}.csv", v.label);
    let mut rows = Vec::new();
    for tr in traces {
        let stroke = match tr.stroke {
            otto_core::engine::Stroke::Expansion => "expansion",
            otto_core::engine::Stroke::Compression => "compression",
        };
        for (t, sy) in tr.times.iter().zip(&tr.sigma_y) {
            rows.push(vec![
                tr.cycle.to_string(),
                stroke.to_string(),
                fmt(*t),
                fmt(*sy),
            ]);
        }
    }
    em.csv(&name, &["cycle", "stroke", "time_us", "sigma_y"], &rows)
}

type CycleCurve<'a> = (&'a Variant, CycleRecord, Vec<CurvePoint>);

fn emit_enhancement(
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
    cfg: &RunConfig,
    curves: &[CycleCurve],
) -> Result<(), CliError> {
    let na = curves.iter().find(|(v, ..)| v.label == "na");
    let sta = curves.iter().find(|(v, ..)| v.label == "sta");
    let (Some((_, _, na_pts)), Some((_, _, sta_pts))) = (na, sta) else {
        return Ok(());
    };
    let field = if cfg.subtract_heating {
        |p: &CurvePoint| p.n_bar_heating_subtracted
    } else {
        |p: &CurvePoint| p.n_bar
    };
    let rows: Vec<Vec<String>> = na_pts
        .iter()
        .zip(sta_pts)
        .map(|(a, s)| {
            let e = enhancement_ratio(field(s), field(a));
            metrics.push(json!({
                "curve": "enhancement",
                "cycles": a.cycles,
                "tau_us": a.tau_us,
                "enhancement_ratio": e,
                "seed": cfg.seed,
            }));
            vec![a.cycles.to_string(), fmt(a.tau_us), fmt(field(a)), fmt(field(s)), fmt(e)]
        })
        .collect();
    em.csv(
        "enhancement.csv",
        &["cycles", "tau_us", "n_bar_na", "n_bar_sta", "enhancement_ratio"],
        &rows,
    )
}

type TauCurve<'a> = (&'a Variant, Vec<CycleRecord>, Vec<CurvePoint>);

fn emit_power_enhancement(
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
    cfg: &RunConfig,
    curves: &[TauCurve],
) -> Result<(), CliError> {
    let na = curves.iter().find(|(v, ..)| v.label == "na");
    let sta = curves.iter().find(|(v, ..)| v.label == "sta");
    let (Some((_, _, na_pts)), Some((_, _, sta_pts))) = (na, sta) else {
        return Ok(());
    };
    let field = if cfg.subtract_heating {
        |p: &CurvePoint| p.power_heating_subtracted
    } else {
        |p: &CurvePoint| p.power_phonons_per_us
    };
    let rows: Vec<Vec<String>> = na_pts
        .iter()
        .zip(sta_pts)
        .map(|(a, s)| {
            let e = enhancement_ratio(field(s), field(a));
            metrics.push(json!({
                "curve": "power_enhancement",
                "cycles": a.cycles,
                "tau_us": a.tau_us,
                "enhancement_ratio": e,
                "seed": cfg.seed,
            }));
            vec![a.cycles.to_string(), fmt(a.tau_us), fmt(field(a)), fmt(field(s)), fmt(e)]
        })
        .collect();
    em.csv(
        "power_enhancement.csv",
        &["cycles", "tau_us", "power_na", "power_sta", "enhancement_ratio"],
        &rows,
    )
}

fn coherent_populations(n_bar: f64, top: usize) -> Vec<f64> {
    // Poisson weights e^-nbar nbar^n / n!
    let mut p = Vec::with_capacity(top + 1);
    let mut w = (-n_bar).exp();
    for n in 0..=top {
        p.push(w);
        w *= n_bar / (n + 1) as f64;
    }
    p
}

fn run_thermometry<'a>(
    cfg: &RunConfig,
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
    mut engine_records: impl Iterator<Item = &'a CycleRecord>,
) -> Result<(), CliError> {
    let Some(th) = &cfg.thermometry else {
        return Ok(());
    };
    let populations: Vec<f64> = match th.source {
        ThermometrySource::Engine => {
            let rec = engine_records.next().ok_or_else(|| {
                CliError::Config("thermometry source \"engine\" needs an engine run".into())
            })?;
            rec.final_state.phonon_populations()
        }
        ThermometrySource::Coherent => coherent_populations(th.n_bar, 40),
        ThermometrySource::Thermal => thermal_populations(th.n_bar, 40),
    };
    let scan = ThermometryScan {
        seed: cfg.seed,
        shots_per_point: th.shots_per_point,
        ..ThermometryScan::uniform(
            mhz_to_rad_per_us(th.omega_bsb_mhz),
            cfg.params.eta,
            th.shots_per_point,
            cfg.seed,
        )
    };
    let signal = synthesize_signal(&populations, &scan);
    let scan_rows: Vec<Vec<String>> = scan
        .times
        .iter()
        .zip(signal.ideal.iter().zip(&signal.sampled))
        .map(|(&t, (&ideal, &sampled))| {
            vec![fmt(t), fmt(sampled), fmt(ideal), th.shots_per_point.to_string()]
        })
        .collect();
    em.csv(
        "thermometry_scan.csv",
        &["time_us", "p_down", "p_down_ideal", "shots"],
        &scan_rows,
    )?;

    let base_options = FitOptions { occupation_floor: th.occupation_floor, ..FitOptions::default() };
    let mut fits: Vec<(String, FitOptions)> = vec![("policy".into(), base_options.clone())];
    for &cutoff in &th.forced_cutoffs {
        fits.push((
            format!("cutoff{cutoff}"),
            FitOptions { forced_cutoff: Some(cutoff), ..base_options.clone() },
        ));
    }
    for (tag, options) in fits {
        let fit = fit_populations(&signal.sampled, &scan, &options)
            .map_err(|e| CliError::Numerics(e.to_string()))?;
        let boot = bootstrap_errors(
            &signal.sampled,
            &scan,
            &fit,
            &options,
            th.resamples,
            cfg.seed.wrapping_add(1),
        )
        .map_err(|e| CliError::Numerics(e.to_string()))?;
        emit_fit(em, metrics, cfg, &tag, &fit, boot.sigma_n_bar)?;
    }
    Ok(())
}

fn emit_fit(
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
    cfg: &RunConfig,
    tag: &str,
    fit: &PhononFit,
    sigma_n_bar_bootstrap: f64,
) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = fit
        .populations
        .iter()
        .zip(&fit.sigma_populations)
        .enumerate()
        .map(|(n, (&p, &s))| vec![n.to_string(), fmt(p), fmt(s)])
        .collect();
    em.csv(&format!("thermometry_fit_{tag}.csv"), &["n", "p_n", "sigma_p_n"], &rows)?;
    metrics.push(json!({
        "curve": format!("thermometry_{tag}"),
        "cutoff": fit.cutoff,
        "n_bar": fit.n_bar,
        "sigma_n_bar": fit.sigma_n_bar,
        "sigma_n_bar_bootstrap": sigma_n_bar_bootstrap,
        "total_occupation": fit.total_occupation,
        "rss": fit.rss,
        "seed": cfg.seed,
    }));
    Ok(())
}

fn emit_waveform_and_cost(
    cfg: &RunConfig,
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
) -> Result<(), CliError> {
    let params = cfg.engine_params();
    let amplitude = cd_cost_ratio_amplitude(&params, 4096);
    let closed = params.cd_scale.abs() * cd_cost_closed_form(&params);
    let intensity = cd_cost_ratio_intensity(&params, 4096);
    metrics.push(json!({
        "curve": "cd_cost",
        "cost_ratio_amplitude": amplitude,
        "cost_ratio_amplitude_closed_form": closed,
        "cost_ratio_intensity": intensity,
        "cd_scale": params.cd_scale,
        "seed": cfg.seed,
    }));
    // waveform useful mainly for the cost preset; cheap enough to always emit
    let n = 400;
    let rows: Vec<Vec<String>> = (0..=n)
        .map(|i| {
            let t = params.tau * i as f64 / n as f64;
            vec![
                fmt(t),
                fmt(v_of_t(&params, t)),
                fmt(params.cd_scale * omega_cd(&params, t)),
            ]
        })
        .collect();
    em.csv("cd_waveform.csv", &["time_us", "v_rad_per_us", "omega_cd_rad_per_us"], &rows)
}

/// Propagates one expansion stroke in the explicit three-tone lab frame
/// and in the averaged model, sampling the overlap on a uniform grid.
fn run_rwa_check(
    cfg: &RunConfig,
    em: &mut Emitter,
    metrics: &mut Vec<serde_json::Value>,
) -> Result<(), CliError> {
    let params = cfg.engine_params();
    let space = cfg.fock_space();
    let policy = cfg.step_policy();
    let with_cd = cfg.options.with_cd;

    let interaction = InteractionHamiltonian::new(params, space, with_cd);
    let lab = LabFrameHamiltonian::new(params, space, standard_tones(&params, with_cd), 1);

    let mut rho_int = QuantumState::ground(space);
    let mut rho_lab = QuantumState::ground(space);
    let samples = 100;
    let t_end = params.tau / 2.0;
    let mut rows = Vec::with_capacity(samples + 1);
    let mut min_fidelity = 1.0_f64;
    for k in 0..=samples {
        let t = t_end * k as f64 / samples as f64;
        propagate(&mut rho_int, &interaction, t, &policy, None)?;
        propagate(&mut rho_lab, &lab, t, &policy, None)?;
        // both states stay pure (unitary from a pure start), so the overlap
        // trace is |<psi|phi>|^2
        let a = &rho_int.rho;
        let b = &rho_lab.rho;
        let mut overlap = otto_core::C64::new(0.0, 0.0);
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                overlap += a[(i, j)] * b[(j, i)];
            }
        }
        let fidelity = overlap.re.max(0.0).sqrt();
        min_fidelity = min_fidelity.min(fidelity);
        rows.push(vec![fmt(t), fmt(fidelity)]);
    }
    let end = rows.last().expect("samples");
    metrics.push(json!({
        "curve": "rwa_fidelity",
        "tau_us": params.tau,
        "end_fidelity": end[1].parse::<f64>().unwrap_or(f64::NAN),
        "min_fidelity": min_fidelity,
        "seed": cfg.seed,
    }));
    em.csv("rwa_fidelity.csv", &["time_us", "fidelity"], &rows)
}

const SCHEMA_NOTES: &str = "\
curve_*.csv
  cycles                    completed engine cycles N
  tau_us                    cycle duration, us
  with_cd                   counterdiabatic term applied during strokes
  dephased                  battery coherences erased after every cycle
  n_bar                     battery mean phonon number after N cycles
  n_bar_heating_subtracted  n_bar - Gamma N tau (Gamma = 0 when heating off)
  power_phonons_per_us      n_bar / (N tau)
  power_heating_subtracted  subtracted n_bar / (N tau)
  work_energy               omega * n_bar, rad/us energy units
  classical_line            N * n_bar(first point) (cycle sweeps only)
trace_*.csv                 <sigma_y>(t) at integrator substeps per stroke
enhancement.csv             (n_sta - n_na) / n_na per cycle count
power_enhancement.csv       (P_sta - P_na) / P_na per cycle time
thermometry_scan.csv        blue-sideband p_down vs probe time
thermometry_fit_*.csv       fitted Fock populations per cutoff policy
cd_waveform.csv             sweep v(t) and applied counterdiabatic amplitude
rwa_fidelity.csv            lab-frame vs averaged-model overlap over a stroke
metrics.json                flat records keyed by curve/cycles/tau_us/seed
manifest.json               config echo + version + emitted file list
timestamp.txt               wall clock; excluded from byte-for-byte checks

All frequencies in config files are MHz and are converted internally as
omega = 2 pi f; emitted angular quantities are rad/us.
";
