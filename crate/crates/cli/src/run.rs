//! Experiment runners: build simulator objects from validated configs,
//! execute, and write CSV artifacts plus a JSON provenance sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use himit_core::densim::UnitaryGate;
use himit_core::gates;
use himit_core::landscape::{argmin_displacement, grid_min, sweep, AxisSpec, GridSpec};
use himit_core::noise::attach_noise;
use himit_core::pulsekit::{
    accumulated_phase, gaussian_schedule, invert_schedule, pi_pulse_amplitude, propagate_rwa,
    unitary_overlap, PulseSchedule, TlsDrive,
};
use himit_core::seeding::{derive_seed, rng_from_seed};
use himit_core::tomo::{chi_exact, chi_sampled, pauli_labels, process_fidelity, ChiMatrix};
use himit_core::transforms::{fold, Circuit, FoldVariant, GateRef};
use himit_core::vqe::{
    minimize_adam, minimize_model_based, AdamParams, TrustRegionParams, VqeProblem, VqeTrace,
};

use crate::config::{
    check_experiment, load_ansatz, load_config, load_hamiltonian, shot_mode, Arm, ExperimentKind,
    FoldConfig, LandscapeConfig, OptimizerConfig, PulseAction, PulseConfig, QptConfig,
    ScheduleConfig, VqeConfig,
};
use crate::{CliError, Invocation};

/// Collects artifacts for one run and finishes with the provenance sidecar.
struct Emitter {
    dir: PathBuf,
    written: Vec<PathBuf>,
    names: Vec<String>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| {
            CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display()))
        })?;
        Ok(Emitter { dir: dir.to_path_buf(), written: Vec::new(), names: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        self.names.push(name.to_string());
        Ok(())
    }

    fn finish(
        mut self,
        stem: &str,
        experiment: ExperimentKind,
        seed: u64,
        arm: Option<Arm>,
        config_text: &str,
        summary: serde_json::Value,
    ) -> Result<Vec<PathBuf>, CliError> {
        let provenance = json!({
            "experiment": experiment.to_string(),
            "seed": seed,
            "arm": arm.map(|a| a.to_string()),
            "config_sha256": sha256_hex(config_text),
            "toolkit_version": env!("CARGO_PKG_VERSION"),
            "outputs": self.names,
            "summary": summary,
        });
        let name = format!("{stem}.provenance.json");
        let path = self.dir.join(&name);
        let text = format!("{:#}\n", provenance);
        fs::write(&path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(self.written)
    }
}

fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn runtime(e: himit_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Dispatch one CLI invocation: load and validate the config, apply
/// command-line overrides, run the experiment, and report written files.
pub fn execute(kind: ExperimentKind, invocation: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    if invocation.arm.is_some()
        && !matches!(kind, ExperimentKind::Vqe | ExperimentKind::Landscape)
    {
        return Err(CliError::Config(format!(
            "--arm applies only to vqe and landscape, not {kind}"
        )));
    }
    match kind {
        ExperimentKind::Pulse => {
            let (mut cfg, text) = load_config::<PulseConfig>(&invocation.config)?;
            check_experiment(cfg.experiment, kind)?;
            apply_common_overrides(&mut cfg.seed, &mut cfg.out_dir, invocation);
            run_pulse(&cfg, &text)
        }
        ExperimentKind::Fold => {
            let (mut cfg, text) = load_config::<FoldConfig>(&invocation.config)?;
            check_experiment(cfg.experiment, kind)?;
            apply_common_overrides(&mut cfg.seed, &mut cfg.out_dir, invocation);
            run_fold(&cfg, &text)
        }
        ExperimentKind::Qpt => {
            let (mut cfg, text) = load_config::<QptConfig>(&invocation.config)?;
            check_experiment(cfg.experiment, kind)?;
            apply_common_overrides(&mut cfg.seed, &mut cfg.out_dir, invocation);
            run_qpt(&cfg, &text)
        }
        ExperimentKind::Vqe => {
            let (mut cfg, text) = load_config::<VqeConfig>(&invocation.config)?;
            check_experiment(cfg.experiment, kind)?;
            apply_common_overrides(&mut cfg.seed, &mut cfg.out_dir, invocation);
            if let Some(arm) = &invocation.arm {
                cfg.arm = arm.parse()?;
            }
            run_vqe(&cfg, &text)
        }
        ExperimentKind::Landscape => {
            let (mut cfg, text) = load_config::<LandscapeConfig>(&invocation.config)?;
            check_experiment(cfg.experiment, kind)?;
            apply_common_overrides(&mut cfg.seed, &mut cfg.out_dir, invocation);
            if let Some(arm) = &invocation.arm {
                cfg.arm = arm.parse()?;
            }
            run_landscape(&cfg, &text)
        }
    }
}

fn apply_common_overrides(seed: &mut u64, out_dir: &mut PathBuf, invocation: &Invocation) {
    if let Some(s) = invocation.seed {
        *seed = s;
    }
    if let Some(out) = &invocation.out {
        *out_dir = out.clone();
    }
}

const SCHEDULE_HEADER: &str = "index,dt,amplitude";

fn schedule_csv(s: &PulseSchedule) -> String {
    let mut text = String::from(SCHEDULE_HEADER);
    text.push('\n');
    let dt = s.dt;
    for (index, amplitude) in s.amplitudes.iter().enumerate() {
        text.push_str(&format!("{index},{dt},{amplitude}\n"));
    }
    text
}

fn parse_schedule_csv(path: &Path) -> Result<PulseSchedule, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read schedule {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == SCHEDULE_HEADER => {}
        _ => {
            return Err(CliError::Config(format!(
                "schedule {} must start with the header \"{SCHEDULE_HEADER}\"",
                path.display()
            )))
        }
    }
    let mut dt = None;
    let mut amplitudes = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Config(format!(
                "schedule {} line {}: expected 3 comma-separated fields",
                path.display(),
                lineno + 2
            )));
        }
        let parse = |field: &str, what: &str| {
            field.trim().parse::<f64>().map_err(|e| {
                CliError::Config(format!(
                    "schedule {} line {}: bad {what}: {e}",
                    path.display(),
                    lineno + 2
                ))
            })
        };
        let row_dt = parse(fields[1], "dt")?;
        match dt {
            None => dt = Some(row_dt),
            Some(existing) if existing == row_dt => {}
            Some(existing) => {
                return Err(CliError::Config(format!(
                    "schedule {} line {}: dt {row_dt} differs from {existing}; \
                     schedules must be uniformly sampled",
                    path.display(),
                    lineno + 2
                )))
            }
        }
        amplitudes.push(parse(fields[2], "amplitude")?);
    }
    let dt = dt.ok_or_else(|| {
        CliError::Config(format!("schedule {} has no samples", path.display()))
    })?;
    PulseSchedule::new(dt, amplitudes)
        .map_err(|e| CliError::Config(format!("schedule {}: {e}", path.display())))
}

pub fn run_pulse(cfg: &PulseConfig, config_text: &str) -> Result<Vec<PathBuf>, CliError> {
    let schedule = match &cfg.schedule {
        ScheduleConfig::Gaussian(g) => {
            let amplitude = g
                .amplitude
                .unwrap_or_else(|| pi_pulse_amplitude(cfg.epsilon_strength, g.u_sigma));
            gaussian_schedule(amplitude, g.u_sigma, g.t_total, g.n_samples)
                .map_err(|e| CliError::Config(format!("schedule.gaussian: {e}")))?
        }
        ScheduleConfig::File(f) => parse_schedule_csv(&f.path)?,
    };
    let drive = TlsDrive::resonant(cfg.epsilon_strength);
    let mut emitter = Emitter::new(&cfg.out_dir)?;
    match cfg.action {
        PulseAction::Invert => {
            let inverted = invert_schedule(&schedule);
            emitter.write("schedule_inverted.csv", &schedule_csv(&inverted))?;
            let summary = json!({
                "n_samples": inverted.amplitudes.len(),
                "duration": inverted.duration(),
                "peak_amplitude": inverted.peak_amplitude(),
            });
            emitter.finish(
                "schedule_inverted",
                cfg.experiment,
                cfg.seed,
                None,
                config_text,
                summary,
            )
        }
        PulseAction::Propagate => {
            let propagator = propagate_rwa(&schedule, &drive).map_err(runtime)?;
            let fidelity_to_x =
                unitary_overlap(propagator.matrix(), &gates::pauli_x()).powi(2);
            let round_trip = schedule
                .concat(&invert_schedule(&schedule))
                .map_err(runtime)?;
            let round_trip_prop = propagate_rwa(&round_trip, &drive).map_err(runtime)?;
            let round_trip_fidelity =
                unitary_overlap(round_trip_prop.matrix(), &gates::identity(2)).powi(2);
            let phase = accumulated_phase(&schedule, &drive);
            let weak_ratio = drive.weak_driving_ratio(&schedule);

            emitter.write("schedule.csv", &schedule_csv(&schedule))?;
            let mut report = String::from("metric,value\n");
            report.push_str(&format!("fidelity_to_x,{fidelity_to_x}\n"));
            report.push_str(&format!("round_trip_identity_fidelity,{round_trip_fidelity}\n"));
            report.push_str(&format!("accumulated_phase,{phase}\n"));
            report.push_str(&format!("weak_driving_ratio,{weak_ratio}\n"));
            report.push_str(&format!("duration,{}\n", schedule.duration()));
            report.push_str(&format!("peak_amplitude,{}\n", schedule.peak_amplitude()));
            emitter.write("pulse_report.csv", &report)?;
            let summary = json!({
                "fidelity_to_x": fidelity_to_x,
                "round_trip_identity_fidelity": round_trip_fidelity,
                "accumulated_phase": phase,
            });
            emitter.finish("pulse_report", cfg.experiment, cfg.seed, None, config_text, summary)
        }
    }
}

pub fn run_fold(cfg: &FoldConfig, config_text: &str) -> Result<Vec<PathBuf>, CliError> {
    let model = cfg.noise.build()?;
    let ideal_matrix = gates::gate_matrix(&cfg.gate, None, false)
        .map_err(|e| CliError::Config(format!("gate: {e}")))?;
    let ideal_chi = ChiMatrix::of_unitary(
        &UnitaryGate::new(cfg.gate.clone(), ideal_matrix)
            .map_err(|e| CliError::Config(format!("gate: {e}")))?,
    );
    let mut rows = String::from("variant,n,process_fidelity\n");
    let mut fidelities = Vec::new();
    for (variant_index, (variant, name)) in
        [(FoldVariant::Default, "default"), (FoldVariant::Inverse, "inverse")]
            .into_iter()
            .enumerate()
    {
        for n in 0..=cfg.n_max {
            let circuit =
                fold(&cfg.gate, n, variant).map_err(|e| CliError::Config(format!("gate: {e}")))?;
            let noisy = attach_noise(&circuit, &model).map_err(runtime)?;
            let realization = model.realize(&mut rng_from_seed(derive_seed(
                cfg.seed,
                &[variant_index as u64, n as u64],
            )));
            let bound = noisy.bind(None, &realization).map_err(runtime)?;
            let chi = chi_exact(&bound).map_err(runtime)?;
            let fidelity = process_fidelity(&chi, &ideal_chi).map_err(runtime)?;
            rows.push_str(&format!("{name},{n},{fidelity}\n"));
            fidelities.push((name, n, fidelity));
        }
    }
    let mut emitter = Emitter::new(&cfg.out_dir)?;
    emitter.write("fold.csv", &rows)?;
    let summary = json!({
        "gate": cfg.gate,
        "n_max": cfg.n_max,
        "default_final_fidelity": fidelities
            .iter()
            .find(|(name, n, _)| *name == "default" && *n == cfg.n_max)
            .map(|(_, _, f)| *f),
        "inverse_final_fidelity": fidelities
            .iter()
            .find(|(name, n, _)| *name == "inverse" && *n == cfg.n_max)
            .map(|(_, _, f)| *f),
    });
    emitter.finish("fold", cfg.experiment, cfg.seed, None, config_text, summary)
}

pub fn run_qpt(cfg: &QptConfig, config_text: &str) -> Result<Vec<PathBuf>, CliError> {
    let ideal_matrix = gates::gate_matrix(&cfg.gate, None, false)
        .map_err(|e| CliError::Config(format!("gate: {e}")))?;
    let arity = gates::lookup(&cfg.gate)
        .ok_or_else(|| CliError::Config(format!("unknown gate \"{}\"", cfg.gate)))?
        .arity;
    if let Some(0) = cfg.shots {
        return Err(CliError::Config("shots must be positive when given".to_string()));
    }
    let model = cfg.noise.build()?;
    let circuit = Circuit::new(
        arity,
        vec![GateRef::fixed(cfg.gate.clone(), (0..arity).collect::<Vec<_>>())],
    )
    .map_err(|e| CliError::Config(format!("gate: {e}")))?;
    let noisy = attach_noise(&circuit, &model).map_err(runtime)?;
    let realization = model.realize(&mut rng_from_seed(derive_seed(cfg.seed, &[0])));
    let bound = noisy.bind(None, &realization).map_err(runtime)?;
    let chi = match cfg.shots {
        None => chi_exact(&bound).map_err(runtime)?,
        Some(shots) => {
            chi_sampled(&bound, shots, derive_seed(cfg.seed, &[1])).map_err(runtime)?
        }
    };
    let ideal_chi = ChiMatrix::of_unitary(
        &UnitaryGate::new(cfg.gate.clone(), ideal_matrix)
            .map_err(|e| CliError::Config(format!("gate: {e}")))?,
    );
    let fidelity = process_fidelity(&chi, &ideal_chi).map_err(runtime)?;

    let labels = pauli_labels(arity);
    let mut rows = String::from("row_pauli,col_pauli,re,im\n");
    for (i, row_label) in labels.iter().enumerate() {
        for (j, col_label) in labels.iter().enumerate() {
            let entry = chi.data()[(i, j)];
            rows.push_str(&format!("{row_label},{col_label},{},{}\n", entry.re, entry.im));
        }
    }
    let mut emitter = Emitter::new(&cfg.out_dir)?;
    emitter.write("chi.csv", &rows)?;
    let summary = json!({
        "gate": cfg.gate,
        "shots": cfg.shots,
        "process_fidelity_to_ideal": fidelity,
        "chi_trace_re": chi.trace().re,
        "hermiticity_defect": chi.hermiticity_defect(),
        "tp_defect": chi.tp_defect(),
    });
    emitter.finish("chi", cfg.experiment, cfg.seed, None, config_text, summary)
}

fn build_problem(
    ansatz_source: &str,
    hamiltonian_source: &str,
    noise: &crate::config::NoiseConfig,
    shots: Option<u64>,
    arm: Arm,
    rc_instances: usize,
) -> Result<VqeProblem, CliError> {
    let ansatz = load_ansatz(ansatz_source)?;
    let hamiltonian = load_hamiltonian(hamiltonian_source)?;
    let model = match arm {
        Arm::Ideal => himit_core::noise::GateErrorModel::noiseless(),
        _ => noise.build()?,
    };
    VqeProblem::new(ansatz, hamiltonian, model, shot_mode(shots), arm.mitigation(rc_instances))
        .map_err(|e| CliError::Config(e.to_string()))
}

fn trace_csv(trace: &VqeTrace, n_slots: usize) -> String {
    let mut header = String::from("iteration,evaluations_used,energy");
    for slot in 0..n_slots {
        header.push_str(&format!(",param{slot}"));
    }
    header.push('\n');
    let mut text = header;
    for (iteration, point) in trace.iterations.iter().enumerate() {
        text.push_str(&format!(
            "{iteration},{},{}",
            point.evaluations_used, point.energy
        ));
        for value in &point.params {
            text.push_str(&format!(",{value}"));
        }
        text.push('\n');
    }
    text
}

pub fn run_vqe(cfg: &VqeConfig, config_text: &str) -> Result<Vec<PathBuf>, CliError> {
    let problem = build_problem(
        &cfg.ansatz,
        &cfg.hamiltonian,
        &cfg.noise,
        cfg.shots,
        cfg.arm,
        cfg.rc_instances,
    )?;
    let n_slots = problem.ansatz.n_slots();
    if cfg.initial_params.len() != n_slots {
        return Err(CliError::Config(format!(
            "initial_params has {} entries but the ansatz exposes {} parameter slots",
            cfg.initial_params.len(),
            n_slots
        )));
    }
    let trace = match &cfg.optimizer {
        OptimizerConfig::Adam(a) => {
            let hyper = AdamParams {
                learning_rate: a.learning_rate,
                beta1: a.beta1,
                beta2: a.beta2,
                epsilon: a.epsilon,
            };
            minimize_adam(&problem, &cfg.initial_params, &hyper, a.max_iters, cfg.seed)
                .map_err(runtime)?
        }
        OptimizerConfig::ModelBased(m) => {
            let region = TrustRegionParams {
                initial_radius: m.initial_radius,
                final_radius: m.final_radius,
            };
            minimize_model_based(&problem, &cfg.initial_params, m.budget, &region, cfg.seed)
                .map_err(runtime)?
        }
    };
    let last = trace.iterations.last().expect("traces always hold the initial iterate");
    let warning_non_converged = (last.energy - trace.converged_energy).abs() > cfg.warn_window;

    let stem = format!("vqe_{}", cfg.arm);
    let mut emitter = Emitter::new(&cfg.out_dir)?;
    emitter.write(&format!("{stem}.csv"), &trace_csv(&trace, n_slots))?;
    let summary = json!({
        "converged_energy": trace.converged_energy,
        "final_energy": last.energy,
        "iterations": trace.iterations.len(),
        "total_evaluations": last.evaluations_used,
        "warning_non_converged": warning_non_converged,
    });
    emitter.finish(&stem, cfg.experiment, cfg.seed, Some(cfg.arm), config_text, summary)
}

pub fn run_landscape(cfg: &LandscapeConfig, config_text: &str) -> Result<Vec<PathBuf>, CliError> {
    let problem = build_problem(
        &cfg.ansatz,
        &cfg.hamiltonian,
        &cfg.noise,
        cfg.shots,
        cfg.arm,
        cfg.rc_instances,
    )?;
    let spec = GridSpec::new(
        cfg.grid.fixed_slot,
        cfg.grid.fixed_value,
        AxisSpec::new(cfg.grid.axis1.slot, cfg.grid.axis1.start, cfg.grid.axis1.stop, cfg.grid.axis1.points),
        AxisSpec::new(cfg.grid.axis2.slot, cfg.grid.axis2.start, cfg.grid.axis2.stop, cfg.grid.axis2.points),
        shot_mode(cfg.shots),
    )
    .map_err(|e| CliError::Config(format!("grid: {e}")))?;
    let grid = sweep(&problem, &spec, cfg.seed).map_err(runtime)?;

    let axis1 = grid.axis1_values();
    let axis2 = grid.axis2_values();
    let mut rows = String::from("row,col,axis1_value,axis2_value,energy\n");
    for (i, a1) in axis1.iter().enumerate() {
        for (j, a2) in axis2.iter().enumerate() {
            rows.push_str(&format!("{i},{j},{a1},{a2},{}\n", grid.energy(i, j)));
        }
    }
    let (argmin_params, min_energy) = grid_min(&grid);
    let ideal_reference = if cfg.arm == Arm::Ideal {
        None
    } else {
        let ideal_problem = build_problem(
            &cfg.ansatz,
            &cfg.hamiltonian,
            &cfg.noise,
            cfg.shots,
            Arm::Ideal,
            cfg.rc_instances,
        )?;
        Some(sweep(&ideal_problem, &spec, cfg.seed).map_err(runtime)?)
    };

    let stem = format!("landscape_{}", cfg.arm);
    let mut emitter = Emitter::new(&cfg.out_dir)?;
    emitter.write(&format!("{stem}.csv"), &rows)?;
    let summary = json!({
        "min_energy": min_energy,
        "argmin_params": argmin_params,
        "energy_range": grid.energy_range(),
        "argmin_displacement_from_ideal": ideal_reference
            .as_ref()
            .map(|reference| argmin_displacement(&grid, reference)),
    });
    emitter.finish(&stem, cfg.experiment, cfg.seed, Some(cfg.arm), config_text, summary)
}
