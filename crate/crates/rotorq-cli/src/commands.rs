//! Subcommand implementations. Each returns the files it wrote after
//! stamping a manifest; validation failures surface as Err(String) and map
//! to exit code 1, numerical failures to exit code 2 via `CmdError`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use std::path::{Path, PathBuf};

use rotorq::circuit::{compile, run as run_circuit, CircuitSpec};
use rotorq::gates::{solve_two_pulse, GateSolution, PulseTemplate, TargetGate};
use rotorq::observables::{extract_phase, free_orientation_trace, magic_angle, orientation};
use rotorq::propagator::{
    check_convergence, evolve_state, propagate, Frame, PropagationResult, QuantumState,
};
use rotorq::pulse::{apply_errors, synthesize};
use rotorq::rotor::RotationalBasis;
use rotorq::scan::{bandwidth_phase_axes, detuning_delay_axes, scan_2d, ScanAxis, ScanResult};
use rotorq::units::s_to_ps;
use rotorq::{average_gate_fidelity, Error as LibError};

use crate::config::RunConfig;
use crate::output::{
    dmatrix_json, ensure_dir, matrix2_json, pi_fraction, write_text, Csv, Manifest,
};

/// Failure carrying the intended process exit code.
pub struct CmdError {
    pub message: String,
    pub code: i32,
}

impl CmdError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: 1 }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: 2 }
    }
}

impl From<LibError> for CmdError {
    fn from(e: LibError) -> Self {
        Self { message: e.to_string(), code: if e.is_numerical() { 2 } else { 1 } }
    }
}

impl From<String> for CmdError {
    fn from(message: String) -> Self {
        Self { message, code: 1 }
    }
}

pub type CmdResult = Result<(), CmdError>;

const BUILTIN_GATES: &str = "I, X, Y, Z, H, S, T";

/// Gate from a name or from eight comma-separated reals (row-major
/// re,im pairs).
pub fn parse_gate(name: Option<&str>, matrix: Option<&str>) -> Result<TargetGate, CmdError> {
    match (name, matrix) {
        (Some(n), None) => TargetGate::by_name(n).ok_or_else(|| {
            CmdError::validation(format!(
                "unknown gate name '{n}'; built-in gates are {BUILTIN_GATES}"
            ))
        }),
        (None, Some(m)) => {
            let vals: Vec<f64> = m
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CmdError::validation(format!("bad matrix entry: {e}")))?;
            if vals.len() != 8 {
                return Err(CmdError::validation(format!(
                    "matrix needs 8 reals (row-major re,im pairs), got {}",
                    vals.len()
                )));
            }
            let c = |k: usize| Complex64::new(vals[2 * k], vals[2 * k + 1]);
            let m = Matrix2::new(c(0), c(1), c(2), c(3));
            TargetGate::from_matrix(m, Some("custom".into())).map_err(CmdError::from)
        }
        _ => Err(CmdError::validation(
            "specify exactly one of --gate NAME or --matrix 'a,b,c,d,e,f,g,h'",
        )),
    }
}

fn solution_json(sol: &GateSolution) -> serde_json::Value {
    let p = &sol.params;
    json!({
        "alpha_rad": sol.alpha,
        "theta1_rad": p.theta1,
        "phi1_rad": p.phi1,
        "theta2_rad": p.theta2,
        "phi2_rad": p.phi2,
        "tau_s": p.tau,
        "bandwidth_rad_per_s": p.bandwidth,
        "carrier_rad_per_s": p.carrier,
        "alpha": pi_fraction(sol.alpha),
        "theta1": pi_fraction(p.theta1),
        "phi1": pi_fraction(p.phi1),
        "theta2": pi_fraction(p.theta2),
        "phi2": pi_fraction(p.phi2),
    })
}

pub fn cmd_solve(
    config: &RunConfig,
    gate_name: Option<&str>,
    matrix: Option<&str>,
    json_out: Option<&Path>,
) -> CmdResult {
    let gate = parse_gate(gate_name, matrix)?;
    let template = config.template();
    let sol = solve_two_pulse(&gate, &template)?;
    let p = &sol.params;
    let label = gate.name().unwrap_or("custom");
    println!("gate   alpha        theta1       phi1         theta2       phi2");
    println!(
        "{label:<6} {:<12} {:<12} {:<12} {:<12} {:<12}",
        pi_fraction(sol.alpha),
        pi_fraction(p.theta1),
        pi_fraction(p.phi1),
        pi_fraction(p.theta2),
        pi_fraction(p.phi2),
    );
    println!(
        "rad    {:<12.8} {:<12.8} {:<12.8} {:<12.8} {:<12.8}",
        sol.alpha, p.theta1, p.phi1, p.theta2, p.phi2
    );
    if let Some(path) = json_out {
        write_text(path, &serde_json::to_string_pretty(&solution_json(&sol)).unwrap())?;
    }
    Ok(())
}

fn write_waveform_csv(
    waveform: &rotorq::Waveform,
    dt: f64,
    path: &Path,
) -> Result<(), CmdError> {
    let mut csv = Csv::new("t_ps,E_V_per_m");
    for (t, e) in waveform.sample(dt)? {
        csv.row(&[s_to_ps(t), e]);
    }
    csv.write(path)?;
    Ok(())
}

pub fn cmd_pulse(
    config: &RunConfig,
    gate_name: Option<&str>,
    matrix: Option<&str>,
    out: &Path,
) -> CmdResult {
    let gate = parse_gate(gate_name, matrix)?;
    let spec = config.molecule();
    spec.validate()?;
    let template = config.template();
    let sol = solve_two_pulse(&gate, &template)?;
    let params = apply_errors(&sol.params, &config.errors)?;
    let waveform = synthesize(&params, spec.mu01_debye())?;
    ensure_dir(out)?;
    let mut manifest = Manifest::new("pulse", config, config.dt());

    let wf_path = out.join("waveform.csv");
    write_waveform_csv(&waveform, config.dt(), &wf_path)?;
    manifest.record(&wf_path);

    let meta = json!({
        "gate": gate.name().unwrap_or("custom"),
        "solution": solution_json(&sol),
        "params_after_errors": params,
        "error_model": config.errors,
        "window_s": [waveform.window.0, waveform.window.1],
        "units": { "time": "ps in csv, s in json", "field": "V/m" },
    });
    let meta_path = out.join("pulse.json");
    write_text(&meta_path, &serde_json::to_string_pretty(&meta).unwrap())?;
    manifest.record(&meta_path);
    manifest.write(out)?;
    println!(
        "pulse window {:.3} ns, {} segments -> {}",
        waveform.duration() * 1e9,
        waveform.segments.len(),
        out.display()
    );
    Ok(())
}

fn trajectory_csv(result: &PropagationResult, path: &Path) -> Result<(), CmdError> {
    let dim = result.trajectory.first().map(|s| s.amplitudes.len()).unwrap_or(0);
    let mut header = String::from("t_ps");
    for j in 0..dim {
        header.push_str(&format!(",re_c{j},im_c{j}"));
    }
    header.push_str(",leakage");
    let mut csv = Csv::new(&header);
    for state in &result.trajectory {
        let mut fields = vec![s_to_ps(state.time)];
        for c in state.amplitudes.iter() {
            fields.push(c.re);
            fields.push(c.im);
        }
        fields.push(state.subspace_leakage());
        csv.row(&fields);
    }
    csv.write(path)?;
    Ok(())
}

pub fn cmd_simulate(
    config: &RunConfig,
    gate_name: Option<&str>,
    matrix: Option<&str>,
    out: &Path,
) -> CmdResult {
    let gate = parse_gate(gate_name, matrix)?;
    let spec = config.molecule();
    spec.validate()?;
    let basis = RotationalBasis::new(&spec);
    let template = config.template();
    let sol = solve_two_pulse(&gate, &template)?;
    let params = apply_errors(&sol.params, &config.errors)?;
    let waveform = synthesize(&params, spec.mu01_debye())?;
    let (t0, t1) = waveform.window;
    let dt = config.certify_dt();

    let spec_wide = spec.with_extra_levels(2);
    let basis_wide = RotationalBasis::new(&spec_wide);
    let runs: Vec<Result<PropagationResult, LibError>> = [
        (dt, &spec, &basis),
        (dt / 2.0, &spec, &basis),
        (dt, &spec_wide, &basis_wide),
    ]
    .into_par_iter()
    .map(|(step, sp, ba)| propagate(sp, ba, &waveform, step, t0, t1))
    .collect();
    let mut results = Vec::new();
    for r in runs {
        results.push(r.map_err(CmdError::from)?);
    }
    let convergence = check_convergence(&results[0], &results[1], &results[0], &results[2]);
    let base = &results[0];

    let report = average_gate_fidelity(&base.unitary_interaction, gate.matrix())?
        .with_context(gate.name().map(String::from), params, config.errors);

    ensure_dir(out)?;
    let mut manifest = Manifest::new("simulate", config, dt);

    let report_path = out.join("report.json");
    let report_json = json!({
        "gate": report.gate_name,
        "f_av": report.f_av,
        "leakage_final_avg": report.leakage,
        "leakage_max_transient": base.leakage_max,
        "m_rel": matrix2_json(&report.m_rel),
        "alpha_rad": sol.alpha,
        "params": params,
        "error_model": config.errors,
        "window_s": [t0, t1],
        "duration_ns": waveform.duration() * 1e9,
        "convergence": convergence,
        "unitarity_defect": base.unitarity_defect,
    });
    write_text(&report_path, &serde_json::to_string_pretty(&report_json).unwrap())?;
    manifest.record(&report_path);

    let wf_path = out.join("waveform.csv");
    write_waveform_csv(&waveform, config.dt(), &wf_path)?;
    manifest.record(&wf_path);

    let traj_path = out.join("trajectory.csv");
    trajectory_csv(base, &traj_path)?;
    manifest.record(&traj_path);

    let unitary_path = out.join("unitary.json");
    let unitary_json = json!({
        "frame": "interaction",
        "t0_s": t0,
        "tf_s": t1,
        "matrix": dmatrix_json(&base.unitary_interaction),
        "lab_frame_matrix": dmatrix_json(&base.unitary_lab),
    });
    write_text(&unitary_path, &serde_json::to_string_pretty(&unitary_json).unwrap())?;
    manifest.record(&unitary_path);
    manifest.write(out)?;

    println!(
        "F_av = {:.6}  leakage(final avg) = {:.3e}  duration = {:.3} ns  converged = {} (dt_err {:.2e}, basis_err {:.2e})",
        report.f_av,
        report.leakage,
        waveform.duration() * 1e9,
        convergence.converged,
        convergence.dt_error,
        convergence.basis_error
    );
    if !convergence.converged {
        return Err(CmdError::numerical(format!(
            "propagation not converged: dt_error {:.3e} (gate 1e-8), basis_error {:.3e} (gate 1e-10)",
            convergence.dt_error, convergence.basis_error
        )));
    }
    Ok(())
}

fn scan_csv(result: &ScanResult, path: &Path) -> Result<(), CmdError> {
    let header = format!(
        "{},{},f_av,leakage",
        result.axis1.parameter.label(),
        result.axis2.parameter.label()
    );
    let mut csv = Csv::new(&header);
    for (i, &v1) in result.axis1.values.iter().enumerate() {
        for (j, &v2) in result.axis2.values.iter().enumerate() {
            match &result.cells[i][j] {
                Ok(cell) => csv.row(&[v1, v2, cell.f_av, cell.leakage]),
                Err(_) => csv.row(&[v1, v2, f64::NAN, f64::NAN]),
            }
        }
    }
    csv.write(path)?;
    Ok(())
}

pub fn preset_axes(
    preset: &str,
    nominal: &rotorq::TwoPulseParams,
) -> Result<(ScanAxis, ScanAxis), CmdError> {
    match preset {
        "fig2" => bandwidth_phase_axes(nominal).map_err(CmdError::from),
        "fig3" => detuning_delay_axes(nominal).map_err(CmdError::from),
        other => Err(CmdError::validation(format!(
            "unknown scan preset '{other}'; available: fig2, fig3"
        ))),
    }
}

/// Preset delay conventions: the bandwidth/phase landscape uses the long
/// delay (112 revivals), the detuning/delay landscape the short one (11.2).
pub fn preset_config(preset: &str, config: &RunConfig) -> RunConfig {
    let mut c = config.clone();
    c.pulse.tau_revivals = match preset {
        "fig2" => 112.0,
        _ => 11.2,
    };
    c
}

pub fn cmd_scan(
    config: &RunConfig,
    gate_name: Option<&str>,
    matrix: Option<&str>,
    preset: &str,
    out: &Path,
) -> CmdResult {
    let gate = parse_gate(gate_name, matrix)?;
    let config = preset_config(preset, config);
    let spec = config.molecule();
    spec.validate()?;
    let template = config.template();
    let sol = solve_two_pulse(&gate, &template)?;
    let (axis1, axis2) = preset_axes(preset, &sol.params)?;
    let result = scan_2d(&gate, &axis1, &axis2, &sol.params, &spec, config.dt())?;

    ensure_dir(out)?;
    let mut manifest = Manifest::new(&format!("scan --preset {preset}"), &config, config.dt());
    let csv_path = out.join("scan.csv");
    scan_csv(&result, &csv_path)?;
    manifest.record(&csv_path);

    let failed: Vec<serde_json::Value> = result
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter().enumerate().filter_map(move |(j, c)| {
                c.as_ref().err().map(|e| json!({ "i": i, "j": j, "error": e }))
            })
        })
        .collect();
    let any_failed = !failed.is_empty();
    manifest.extra = json!({
        "gate": gate.name().unwrap_or("custom"),
        "preset": preset,
        "axis1": result.axis1,
        "axis2": result.axis2,
        "nominal_params": result.nominal,
        "failed_cells": failed,
    });
    manifest.write(out)?;
    println!(
        "scan {} x {} cells -> {}",
        result.axis1.values.len(),
        result.axis2.values.len(),
        out.display()
    );
    if any_failed {
        return Err(CmdError::numerical("some scan cells failed; see manifest.json"));
    }
    Ok(())
}

pub fn parse_gate_list(names: &str) -> Result<Vec<TargetGate>, CmdError> {
    names
        .split(',')
        .map(|n| {
            TargetGate::by_name(n.trim()).ok_or_else(|| {
                CmdError::validation(format!(
                    "unknown gate name '{}' in circuit; built-in gates are {BUILTIN_GATES}",
                    n.trim()
                ))
            })
        })
        .collect()
}

pub fn cmd_circuit(config: &RunConfig, gates: &str, out: &Path) -> CmdResult {
    let gate_list = parse_gate_list(gates)?;
    let spec = config.molecule();
    spec.validate()?;
    let basis = RotationalBasis::new(&spec);
    let template = config.template();
    let circuit = CircuitSpec::new(gate_list, &template);
    let run = run_circuit(&circuit, &spec, &basis, &template, config.dt())?;

    ensure_dir(out)?;
    let mut manifest = Manifest::new("circuit", config, config.dt());

    let train_path = out.join("pulse_train.csv");
    write_waveform_csv(&run.compiled.waveform, config.dt(), &train_path)?;
    manifest.record(&train_path);

    let snaps: Vec<serde_json::Value> = run
        .snapshots
        .iter()
        .map(|s| {
            let mag_phase: Vec<serde_json::Value> = (0..2)
                .map(|i| {
                    serde_json::Value::Array(
                        (0..2)
                            .map(|j| {
                                json!({
                                    "magnitude": s.rho[(i, j)].norm(),
                                    "phase_rad": s.rho[(i, j)].arg(),
                                })
                            })
                            .collect(),
                    )
                })
                .collect();
            json!({
                "t_ps": s_to_ps(s.time),
                "rho": mag_phase,
                "leakage": s.leakage,
                "cumulative_f_av": s.cumulative.f_av,
                "gates_so_far": s.cumulative.gate_name,
            })
        })
        .collect();
    let snap_path = out.join("snapshots.json");
    write_text(
        &snap_path,
        &serde_json::to_string_pretty(&json!({ "frame": "interaction", "boundaries": snaps }))
            .unwrap(),
    )?;
    manifest.record(&snap_path);
    manifest.write(out)?;

    for s in &run.snapshots {
        println!(
            "after {:<12} t = {:9.1} ps  |rho01| = {:.4}  arg rho10 = {:+.4}  F_cum = {:.6}",
            s.cumulative.gate_name.as_deref().unwrap_or("?"),
            s_to_ps(s.time),
            s.rho[(0, 1)].norm(),
            s.rho[(1, 0)].arg(),
            s.cumulative.f_av
        );
    }
    if let Some(worst) = run
        .snapshots
        .iter()
        .map(|s| s.cumulative.f_av)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        println!("worst cumulative F = {worst:.6} -> {}", out.display());
    }
    Ok(())
}

pub fn cmd_observe(
    config: &RunConfig,
    after: Option<&str>,
    gates: Option<&str>,
    out: &Path,
) -> CmdResult {
    let gate_list = match (after, gates) {
        (Some(g), None) => parse_gate_list(g)?,
        (None, Some(list)) => parse_gate_list(list)?,
        _ => {
            return Err(CmdError::validation(
                "specify --after GATE for a single gate or --gates LIST for a sequence",
            ))
        }
    };
    let spec = config.molecule();
    spec.validate()?;
    let basis = RotationalBasis::new(&spec);
    let template = config.template();
    let circuit = CircuitSpec::new(gate_list, &template);
    let compiled = compile(&circuit, &spec, &template)?;
    let (t0, t1) = compiled.waveform.window;
    let tau0 = spec.revival_time();

    // lab-frame state sampled through the train and two revivals beyond it
    let mut init = QuantumState::ground(basis.dimension());
    init.time = t0;
    let sample_dt = tau0 / 64.0;
    let n = ((t1 + 2.0 * tau0 - t0) / sample_dt).ceil() as usize + 1;
    let times: Vec<f64> = (0..n).map(|k| t0 + k as f64 * sample_dt).collect();
    let states = evolve_state(&spec, &basis, &compiled.waveform, &init, &times, config.dt())?;

    ensure_dir(out)?;
    let mut manifest = Manifest::new("observe", config, config.dt());

    let mut csv = Csv::new("t_ps,cos_theta");
    for s in &states {
        csv.row(&[s_to_ps(s.time), orientation(s)]);
    }
    let trace_path = out.join("trace.csv");
    csv.write(&trace_path)?;
    manifest.record(&trace_path);

    // fit the field-free tail
    let final_state = states.last().expect("at least one sample");
    let tail_start = states
        .iter()
        .position(|s| s.time >= t1)
        .unwrap_or(states.len() - 1);
    let tail = free_orientation_trace(&spec, &states[tail_start], 4.0 * tau0, 128)?;
    let fit = extract_phase(&tail)?;
    let fit_path = out.join("fit.json");
    write_text(
        &fit_path,
        &serde_json::to_string_pretty(&json!({
            "amplitude": fit.amplitude,
            "phase_rad": fit.phase,
            "residual_rms": fit.residual_rms,
            "phase_defined": fit.phase_defined,
            "omega01_rad_per_s": spec.omega01(),
            "revival_time_ps": s_to_ps(tau0),
        }))
        .unwrap(),
    )?;
    manifest.record(&fit_path);

    // angular distributions: initial state and each gate boundary
    let grid: Vec<f64> = (0..=180).map(|k| k as f64 * std::f64::consts::PI / 180.0).collect();
    let mut snapshots: Vec<(String, QuantumState)> =
        vec![("initial".into(), init.clone())];
    for (k, &tb) in compiled.boundaries.iter().enumerate() {
        let s = evolve_state(&spec, &basis, &compiled.waveform, &init, &[tb], config.dt())?;
        snapshots.push((format!("boundary_{k}"), s.into_iter().next().unwrap()));
    }
    for (label, state) in &snapshots {
        let dens = rotorq::angular_distribution(state, &grid);
        let mut csv = Csv::new("theta_rad,density");
        for (t, d) in grid.iter().zip(dens.iter()) {
            csv.row(&[*t, *d]);
        }
        let path = out.join(format!("distribution_{label}.csv"));
        csv.write(&path)?;
        manifest.record(&path);
    }
    manifest.write(out)?;

    println!(
        "orientation fit: A = {:.4} phase = {:+.4} rad (residual {:.2e}) over {} samples -> {}",
        fit.amplitude,
        fit.phase,
        fit.residual_rms,
        states.len(),
        out.display()
    );
    let _ = final_state;
    Ok(())
}

pub fn cmd_constants(config: &RunConfig) -> CmdResult {
    let spec = config.molecule();
    spec.validate()?;
    let template = config.template();
    println!("molecule          {}", spec.molecule_name);
    println!("B                 {} cm^-1 = {:.6e} rad/s", spec.rotational_constant_cm1, spec.b_angular());
    println!("mu0               {} D", spec.dipole_moment_debye);
    println!("mu01              {:.6} D", spec.mu01_debye());
    println!("omega01           {:.6e} rad/s = {:.4} GHz", spec.omega01(), spec.omega01() / (2.0 * std::f64::consts::PI) / 1e9);
    println!("revival time      {:.4} ps", s_to_ps(spec.revival_time()));
    println!("j_max             {}", spec.j_max);
    println!("bandwidth         {:.6e} rad/s ({} of omega01)", template.bandwidth, config.pulse.bandwidth_frac);
    println!("sigma_t           {:.4} ps", s_to_ps(template.sigma_t()));
    println!("delay tau         {:.4} ps ({} revivals)", s_to_ps(template.tau), config.pulse.tau_revivals);
    println!("magic angle       {:.4} deg", magic_angle().to_degrees());
    Ok(())
}

pub fn cmd_repro(config: &RunConfig, figure: &str, out: &Path) -> CmdResult {
    match figure {
        "fig2" | "fig3" => {
            for name in ["Z", "H", "S", "T"] {
                let dir: PathBuf = out.join(figure).join(name);
                cmd_scan(config, Some(name), None, figure, &dir)?;
            }
            Ok(())
        }
        "fig4" => {
            let mut c = config.clone();
            c.pulse.tau_revivals = 11.2;
            cmd_circuit(&c, "H,T,S,Z", &out.join("fig4"))
        }
        "fig5" => {
            let mut c = config.clone();
            c.pulse.tau_revivals = 11.2;
            cmd_observe(&c, None, Some("H,T,S,Z"), &out.join("fig5"))
        }
        other => Err(CmdError::validation(format!(
            "unknown figure '{other}'; available: fig2, fig3, fig4, fig5"
        ))),
    }
}
