//! Command line front end.
//!
//! Subcommands compile Hamiltonian descriptions to gate text, verify the
//! compiled circuits against dense matrices, compile propagators, sweep gate
//! counts, and build individual primitives. Exit codes are stable: 0 on
//! success, 2 for unreadable or malformed input, 3 for input that parses but
//! describes something out of range (including the qubit cap, applied before
//! any construction), 4 for construction failures, and 5 when a built
//! circuit fails verification; the message names the worst offender.
//!
//! Every artifact-producing run also writes a manifest recording the
//! command, the content digest of the input, the tool version, tolerances,
//! output paths, and wall-clock time. Artifacts reference the manifest by
//! path and are byte-identical across repeat runs; all files are written
//! atomically via a rename.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::assembly::{build_u_h, planned_qubits, AssemblyError};
use crate::circuit::{Circuit, RegKind};
use crate::evolution::{build_evolution, EvolutionError};
use crate::ledger::{check_bounds, BoundCheck, BoundInputs, ResourceReport};
use crate::matrices::{dense_hamiltonian, expm};
use crate::primitives::adder::emit_add_into;
use crate::primitives::banded::{assign_slots, banded_ancillas, emit_band_walker, emit_banded_oracle};
use crate::primitives::binary_norm::{emit_weighted_prep, prep_ancillas};
use crate::primitives::momentum::{emit_momentum_oracle, momentum_plan};
use crate::primitives::multicontrol::{emit_mcx, mcx_ancillas, Control};
use crate::primitives::multiplex::{emit_multiplexed, RotAxis};
use crate::primitives::state_prep::emit_state_prep;
use crate::qsvt::diag_be::{build_complex_diag, build_real_diag};
use crate::qsvt::phases::{solve_phases, PhaseError};
use crate::qsvt::poly_oracle::{build_poly_oracle, build_x_encoding, PolyOracleError};
use crate::sim::{extract_block, spectral_norm};
use crate::spec_model::{GridSpec, HamiltonianSpec, SpecError, TermSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONSTRUCTION: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Residual tolerance on declared pure-ancilla registers.
const LEAK_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "hamforge",
    version,
    about = "Compiles Hamiltonian descriptions into verified block-encoding circuits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile the square encoding and write gate text plus a JSON report.
    Build(BuildArgs),
    /// Rebuild, simulate, and compare against the dense Hamiltonian.
    Verify(VerifyArgs),
    /// Compile the propagator circuit for a given time and accuracy.
    Evolve(EvolveArgs),
    /// Sweep coordinate register widths and write a CSV of gate counts.
    Count(CountArgs),
    /// Build one primitive circuit by name.
    Primitive(PrimitiveArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Hamiltonian description (JSON).
    spec: PathBuf,
    /// Gate text output path.
    #[arg(long, default_value = "u_h.gates.txt")]
    out: PathBuf,
    /// JSON report output path.
    #[arg(long, default_value = "build_report.json")]
    report: PathBuf,
    /// Refuse specs planning more qubits than this.
    #[arg(long, default_value_t = 22)]
    max_qubits: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Hamiltonian description (JSON).
    spec: PathBuf,
    /// Spectral-norm tolerance on the reconstructed Hamiltonian.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Verify this gate text instead of the freshly compiled circuit.
    #[arg(long)]
    gates: Option<PathBuf>,
    /// Also write the verdict JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Refuse specs planning more qubits than this.
    #[arg(long, default_value_t = 22)]
    max_qubits: usize,
}

#[derive(Args)]
struct EvolveArgs {
    /// Hamiltonian description (JSON).
    spec: PathBuf,
    /// Evolution time t in exp(itH).
    #[arg(long)]
    time: f64,
    /// Requested accuracy of the compiled propagator.
    #[arg(long)]
    eps: f64,
    /// Gate text output path.
    #[arg(long, default_value = "evolution.gates.txt")]
    out: PathBuf,
    /// JSON report output path.
    #[arg(long, default_value = "evolve_report.json")]
    report: PathBuf,
    /// Refuse specs planning more qubits than this.
    #[arg(long, default_value_t = 22)]
    max_qubits: usize,
}

#[derive(Args)]
struct CountArgs {
    /// CSV output path.
    #[arg(long, default_value = "counts.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PrimitiveArgs {
    /// Primitive name; see the subcommand help for the list.
    name: String,
    /// Parameter as key=value; repeat for several. Lists use commas.
    #[arg(long = "param")]
    params: Vec<String>,
    /// Write gate text here (omitted: report only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        CliError {
            code,
            msg: msg.into(),
        }
    }
}

fn spec_code(e: &SpecError) -> i32 {
    match e {
        SpecError::Json(_) => EXIT_SCHEMA,
        _ => EXIT_DOMAIN,
    }
}

fn assembly_err(e: AssemblyError) -> CliError {
    let code = match &e {
        AssemblyError::Spec(s) => spec_code(s),
        _ => EXIT_CONSTRUCTION,
    };
    CliError::new(code, e.to_string())
}

fn evolution_err(e: EvolutionError) -> CliError {
    let code = match &e {
        EvolutionError::Assembly(AssemblyError::Spec(s)) => spec_code(s),
        EvolutionError::Assembly(_) | EvolutionError::Circuit(_) | EvolutionError::Phase(_) => {
            EXIT_CONSTRUCTION
        }
        EvolutionError::BadTolerance(_) => EXIT_DOMAIN,
    };
    CliError::new(code, e.to_string())
}

struct LoadedSpec {
    spec: HamiltonianSpec,
    digest: String,
    path: String,
}

fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::new(EXIT_SCHEMA, format!("cannot read {}: {e}", path.display())))?;
    let digest = hex_digest(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::new(EXIT_SCHEMA, format!("{} is not UTF-8", path.display())))?;
    let spec = HamiltonianSpec::from_json(&text)
        .map_err(|e| CliError::new(spec_code(&e), e.to_string()))?;
    Ok(LoadedSpec {
        spec,
        digest,
        path: path.display().to_string(),
    })
}

fn hex_digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)
        .map_err(|e| CliError::new(EXIT_CONSTRUCTION, format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        CliError::new(
            EXIT_CONSTRUCTION,
            format!("cannot move {} into place: {e}", tmp.display()),
        )
    })
}

fn manifest_path_of(artifact: &Path) -> PathBuf {
    artifact.with_extension("manifest.json")
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    spec_digest: Option<String>,
    tool_version: String,
    tolerances: BTreeMap<String, f64>,
    outputs: Vec<String>,
    wall_clock_ms: u128,
}

fn write_manifest(
    path: &Path,
    command: &str,
    spec_digest: Option<&str>,
    tolerances: &[(&str, f64)],
    outputs: &[&Path],
    started: Instant,
) -> Result<(), CliError> {
    let m = RunManifest {
        command: command.to_string(),
        spec_digest: spec_digest.map(str::to_string),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        tolerances: tolerances
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_clock_ms: started.elapsed().as_millis(),
    };
    write_atomic(path, pretty(&m)?.as_bytes())
}

fn pretty<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::new(EXIT_CONSTRUCTION, format!("serialization failed: {e}")))
}

#[derive(Serialize)]
struct RegisterInfo {
    name: String,
    start: usize,
    width: usize,
    kind: &'static str,
}

fn register_info(c: &Circuit) -> Vec<RegisterInfo> {
    c.regs
        .iter()
        .map(|r| RegisterInfo {
            name: r.name.clone(),
            start: r.start,
            width: r.width,
            kind: r.kind.as_str(),
        })
        .collect()
}

fn spec_q_max(spec: &HamiltonianSpec) -> usize {
    let from_poly = |p: &Vec<f64>| p.len().saturating_sub(1);
    match (&spec.terms, &spec.multi_terms) {
        (Some(t), _) => t.iter().map(|t| from_poly(&t.poly)).max().unwrap_or(0),
        (_, Some(t)) => t
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| from_poly(&f.poly)))
            .max()
            .unwrap_or(0),
        _ => 0,
    }
}

fn enforce_cap(planned: usize, cap: usize) -> Result<(), CliError> {
    if planned > cap {
        return Err(CliError::new(
            EXIT_DOMAIN,
            format!("planned circuit width {planned} exceeds the qubit cap {cap}"),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct BuildReport {
    manifest: String,
    spec_path: String,
    spec_digest: String,
    scale: f64,
    eps: f64,
    n_h: f64,
    l: usize,
    gamma: usize,
    flag_width: usize,
    qubits: usize,
    one_qubit: usize,
    cnot: usize,
    data_in: Vec<String>,
    data_out: Vec<String>,
    flags: Vec<String>,
    registers: Vec<RegisterInfo>,
    resources: ResourceReport,
    gates: String,
}

fn uh_inputs(spec: &HamiltonianSpec, l: usize, gamma: usize) -> BoundInputs {
    let n_max = spec.grids().iter().map(|g| g.n).max().unwrap_or(2);
    BoundInputs {
        n: n_max,
        l,
        q: spec_q_max(spec),
        gamma,
        ..Default::default()
    }
}

fn cmd_build(a: &BuildArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = load_spec(&a.spec)?;
    let planned = planned_qubits(&loaded.spec)
        .map_err(|e| CliError::new(spec_code(&e), e.to_string()))?;
    enforce_cap(planned, a.max_qubits)?;
    let uh = build_u_h(&loaded.spec).map_err(assembly_err)?;

    let mut resources = ResourceReport::new();
    let inputs = uh_inputs(&loaded.spec, uh.l_h, uh.gamma);
    for name in ["U_H", "U_H_table"] {
        resources.push(
            check_bounds(&uh.be.circuit, name, &inputs)
                .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?,
        );
    }

    let manifest_path = manifest_path_of(&a.report);
    let report = BuildReport {
        manifest: manifest_path.display().to_string(),
        spec_path: loaded.path.clone(),
        spec_digest: loaded.digest.clone(),
        scale: uh.be.alpha,
        eps: uh.be.eps,
        n_h: uh.n_h,
        l: uh.l_h,
        gamma: uh.gamma,
        flag_width: uh.flag_width,
        qubits: uh.be.circuit.n_qubits,
        one_qubit: uh.be.circuit.count_1q(),
        cnot: uh.be.circuit.count_cx(),
        data_in: uh.be.data_in.clone(),
        data_out: uh.be.data_out.clone(),
        flags: uh.be.flags.clone(),
        registers: register_info(&uh.be.circuit),
        resources,
        gates: a.out.display().to_string(),
    };

    write_atomic(&a.out, uh.be.circuit.to_text().as_bytes())?;
    write_atomic(&a.report, pretty(&report)?.as_bytes())?;
    write_manifest(
        &manifest_path,
        "build",
        Some(&loaded.digest),
        &[],
        &[&a.out, &a.report],
        started,
    )?;
    println!(
        "wrote {} ({} qubits, {} one-qubit + {} cx) and {}",
        a.out.display(),
        report.qubits,
        report.one_qubit,
        report.cnot,
        a.report.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct CheckRow {
    name: String,
    passed: bool,
    value: f64,
    tolerance: f64,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    manifest: Option<String>,
    spec_path: String,
    spec_digest: String,
    scale: f64,
    qubits: usize,
    passed: bool,
    checks: Vec<CheckRow>,
    resources: ResourceReport,
    worst: Option<String>,
}

fn strict_primitive_rows(spec: &HamiltonianSpec) -> Result<Vec<BoundCheck>, CliError> {
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let grids = spec.grids();
    let mut pairs: Vec<(GridSpec, usize)> = Vec::new();
    if let Some(terms) = &spec.terms {
        for t in terms {
            pairs.push((grids[0], t.m));
        }
    }
    if let Some(terms) = &spec.multi_terms {
        for t in terms {
            for (sigma, f) in t.factors.iter().enumerate() {
                pairs.push((grids[sigma], f.m));
            }
        }
    }
    for (grid, m) in pairs {
        let plan = momentum_plan(&grid, m);
        if !seen.insert((grid.n, m, plan.l)) {
            continue;
        }
        let mut c = Circuit::new(1 + plan.l);
        c.add_register("aflag", 0, 1, RegKind::Flag);
        if plan.l > 0 {
            c.add_register("select", 1, plan.l, RegKind::Data);
        }
        let select: Vec<usize> = (1..1 + plan.l).collect();
        emit_momentum_oracle(&mut c, 0, &select, &grid, m, &plan)
            .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?;
        let row = check_bounds(
            &c,
            "momentum_oracle",
            &BoundInputs {
                l: plan.l,
                ..Default::default()
            },
        )
        .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?;
        rows.push(row);
    }
    let n_max = grids.iter().map(|g| g.n).max().unwrap_or(2);
    let mut c = Circuit::new(2 * n_max - 1);
    c.add_register("pattern", 0, n_max, RegKind::Data);
    c.add_register("hit", n_max, 1, RegKind::Flag);
    if n_max > 2 {
        c.add_register("chain", n_max + 1, n_max - 2, RegKind::Ancilla);
    }
    let controls: Vec<Control> = (0..n_max).map(|q| (q, false)).collect();
    let chain: Vec<usize> = (n_max + 1..2 * n_max - 1).collect();
    emit_mcx(&mut c, &controls, n_max, &chain);
    rows.push(
        check_bounds(
            &c,
            "multicontrol",
            &BoundInputs {
                n: n_max,
                zeros: n_max,
                ..Default::default()
            },
        )
        .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?,
    );
    Ok(rows)
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = load_spec(&a.spec)?;
    let planned = planned_qubits(&loaded.spec)
        .map_err(|e| CliError::new(spec_code(&e), e.to_string()))?;
    enforce_cap(planned, a.max_qubits)?;
    let uh = build_u_h(&loaded.spec).map_err(assembly_err)?;
    let mut be = uh.be;

    if let Some(gp) = &a.gates {
        let text = fs::read_to_string(gp)
            .map_err(|e| CliError::new(EXIT_SCHEMA, format!("cannot read {}: {e}", gp.display())))?;
        let c = Circuit::from_text(&text)
            .map_err(|e| CliError::new(EXIT_SCHEMA, format!("{}: {e}", gp.display())))?;
        let same_shape = c.n_qubits == be.circuit.n_qubits
            && c.regs.len() == be.circuit.regs.len()
            && c.regs.iter().zip(&be.circuit.regs).all(|(x, y)| {
                x.name == y.name && x.start == y.start && x.width == y.width && x.kind == y.kind
            });
        if !same_shape {
            return Err(CliError::new(
                EXIT_SCHEMA,
                format!("{} does not match the register layout of this description", gp.display()),
            ));
        }
        be.circuit = c;
    }

    let dense = dense_hamiltonian(&loaded.spec)
        .map_err(|e| CliError::new(spec_code(&e), e.to_string()))?;
    let ex = extract_block(&be).map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?;
    let alpha = Complex64::new(be.alpha, 0.0);
    let diff: DMatrix<Complex64> = &dense - &ex.matrix * alpha;
    let mut max_dev = 0.0f64;
    let mut at = (0usize, 0usize);
    for r in 0..diff.nrows() {
        for c in 0..diff.ncols() {
            let v = diff[(r, c)].norm();
            if v > max_dev {
                max_dev = v;
                at = (r, c);
            }
        }
    }
    let sdev = spectral_norm(&diff);

    let mut checks = vec![
        CheckRow {
            name: "block_equality".into(),
            passed: sdev <= a.tol,
            value: sdev,
            tolerance: a.tol,
            detail: format!(
                "max entry deviation {max_dev:.3e} at row {}, col {}",
                at.0, at.1
            ),
        },
        CheckRow {
            name: "ancilla_purity".into(),
            passed: ex.max_leak <= LEAK_TOL,
            value: ex.max_leak,
            tolerance: LEAK_TOL,
            detail: "largest residual amplitude on ancillas over flag-zero inputs".into(),
        },
    ];

    let mut resources = ResourceReport::new();
    for row in strict_primitive_rows(&loaded.spec)? {
        resources.push(row);
    }
    let inputs = uh_inputs(&loaded.spec, uh.l_h, uh.gamma);
    for name in ["U_H", "U_H_table"] {
        resources.push(
            check_bounds(&be.circuit, name, &inputs)
                .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?,
        );
    }

    if resources.failed {
        let name = resources
            .entries
            .iter()
            .find(|e| !e.passed)
            .map(|e| e.name.clone())
            .unwrap_or_default();
        checks.push(CheckRow {
            name: "resource_budgets".into(),
            passed: false,
            value: 0.0,
            tolerance: 0.0,
            detail: format!("strict budget {name} exceeded"),
        });
    }

    let worst = checks
        .iter()
        .filter(|c| !c.passed)
        .max_by(|x, y| {
            let rx = x.value / x.tolerance.max(f64::MIN_POSITIVE);
            let ry = y.value / y.tolerance.max(f64::MIN_POSITIVE);
            rx.total_cmp(&ry)
        })
        .map(|c| format!("{}: {} ({})", c.name, c.value, c.detail));
    let passed = checks.iter().all(|c| c.passed);

    let report = VerifyReport {
        manifest: a
            .report
            .as_ref()
            .map(|p| manifest_path_of(p).display().to_string()),
        spec_path: loaded.path.clone(),
        spec_digest: loaded.digest.clone(),
        scale: be.alpha,
        qubits: be.circuit.n_qubits,
        passed,
        checks,
        resources,
        worst: worst.clone(),
    };
    let json = pretty(&report)?;
    print!("{json}");
    if let Some(rp) = &a.report {
        write_atomic(rp, json.as_bytes())?;
        write_manifest(
            &manifest_path_of(rp),
            "verify",
            Some(&loaded.digest),
            &[("tol", a.tol), ("leak", LEAK_TOL)],
            &[rp],
            started,
        )?;
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_VERIFY,
            worst.unwrap_or_else(|| "verification failed".into()),
        ))
    }
}

#[derive(Serialize)]
struct EvolveReport {
    manifest: String,
    spec_path: String,
    spec_digest: String,
    time: f64,
    eps: f64,
    g: usize,
    queries: usize,
    alpha: f64,
    c: f64,
    alpha_h: f64,
    truncation_bound: f64,
    budget_eps: f64,
    measured_error: f64,
    ancilla_leak: f64,
    qubits: usize,
    one_qubit: usize,
    cnot: usize,
    resources: ResourceReport,
    gates: String,
}

fn cmd_evolve(a: &EvolveArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = load_spec(&a.spec)?;
    let planned = crate::evolution::planned_qubits(&loaded.spec)
        .map_err(|e| CliError::new(spec_code(&e), e.to_string()))?;
    enforce_cap(planned, a.max_qubits)?;
    let ev = build_evolution(&loaded.spec, a.time, a.eps).map_err(evolution_err)?;

    let dense = dense_hamiltonian(&loaded.spec)
        .map_err(|e| CliError::new(spec_code(&e), e.to_string()))?;
    let target = expm(&(dense * Complex64::new(0.0, a.time)));
    let ex = extract_block(&ev.be).map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?;
    let measured = spectral_norm(&(&target - &ex.matrix * Complex64::new(2.0, 0.0)));

    let mut resources = ResourceReport::new();
    if ev.g > 0 {
        let mut inputs = uh_inputs(&loaded.spec, ev.l_h, ev.gamma);
        inputs.omega = ev.g;
        resources.push(
            check_bounds(&ev.be.circuit, "evolution", &inputs)
                .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?,
        );
    }

    let manifest_path = manifest_path_of(&a.report);
    let report = EvolveReport {
        manifest: manifest_path.display().to_string(),
        spec_path: loaded.path.clone(),
        spec_digest: loaded.digest.clone(),
        time: a.time,
        eps: a.eps,
        g: ev.g,
        queries: ev.queries,
        alpha: ev.be.alpha,
        c: ev.c,
        alpha_h: ev.alpha_h,
        truncation_bound: ev.bound,
        budget_eps: ev.be.eps,
        measured_error: measured,
        ancilla_leak: ex.max_leak,
        qubits: ev.be.circuit.n_qubits,
        one_qubit: ev.be.circuit.count_1q(),
        cnot: ev.be.circuit.count_cx(),
        resources,
        gates: a.out.display().to_string(),
    };

    write_atomic(&a.out, ev.be.circuit.to_text().as_bytes())?;
    write_atomic(&a.report, pretty(&report)?.as_bytes())?;
    write_manifest(
        &manifest_path,
        "evolve",
        Some(&loaded.digest),
        &[("eps", a.eps), ("leak", LEAK_TOL)],
        &[&a.out, &a.report],
        started,
    )?;
    println!(
        "wrote {} (g = {}, {} applications, measured error {measured:.3e}) and {}",
        a.out.display(),
        ev.g,
        ev.queries,
        a.report.display()
    );
    if measured > a.eps {
        return Err(CliError::new(
            EXIT_VERIFY,
            format!("propagator deviation {measured:.3e} exceeds eps {:.3e}", a.eps),
        ));
    }
    if ex.max_leak > LEAK_TOL {
        return Err(CliError::new(
            EXIT_VERIFY,
            format!("ancilla leak {:.3e} exceeds {LEAK_TOL:.1e}", ex.max_leak),
        ));
    }
    Ok(())
}

fn scaling_spec(n: usize) -> HamiltonianSpec {
    HamiltonianSpec {
        grid: GridSpec { n, a: -1.0, b: 1.0 },
        terms: Some(vec![TermSpec {
            alpha: [1.0, 0.0],
            poly: vec![0.0, 0.5],
            m: 1,
        }]),
        dims: None,
        multi_terms: None,
    }
}

fn loglog_slope(ns: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn cmd_count(a: &CountArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut csv = String::from(
        "n,qubits,one_qubit,cnot,bound_one_qubit,bound_cnot,margin_one_qubit,margin_cnot\n",
    );
    let mut ns = Vec::new();
    let mut counts = Vec::new();
    for n in 3..=7usize {
        let spec = scaling_spec(n);
        let uh = build_u_h(&spec).map_err(assembly_err)?;
        let row = check_bounds(&uh.be.circuit, "U_H", &uh_inputs(&spec, uh.l_h, uh.gamma))
            .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?;
        csv.push_str(&format!(
            "{n},{},{},{},{},{},{},{}\n",
            uh.be.circuit.n_qubits,
            row.one_qubit.actual,
            row.cnot.actual,
            row.one_qubit.bound,
            row.cnot.bound,
            row.one_qubit.margin,
            row.cnot.margin
        ));
        ns.push(n as f64);
        counts.push(row.one_qubit.actual as f64);
    }
    write_atomic(&a.out, csv.as_bytes())?;
    write_manifest(
        &manifest_path_of(&a.out),
        "count",
        None,
        &[],
        &[&a.out],
        started,
    )?;
    println!(
        "wrote {}; one-qubit count slope over n = 3..7 is {:.3}",
        a.out.display(),
        loglog_slope(&ns, &counts)
    );
    Ok(())
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for item in items {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            CliError::new(EXIT_DOMAIN, format!("parameter {item:?} is not key=value"))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn need<'a>(p: &'a BTreeMap<String, String>, k: &str) -> Result<&'a str, CliError> {
    p.get(k)
        .map(String::as_str)
        .ok_or_else(|| CliError::new(EXIT_DOMAIN, format!("missing parameter {k}")))
}

fn get_usize(p: &BTreeMap<String, String>, k: &str, default: Option<usize>) -> Result<usize, CliError> {
    match p.get(k) {
        None => default.ok_or_else(|| CliError::new(EXIT_DOMAIN, format!("missing parameter {k}"))),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::new(EXIT_DOMAIN, format!("parameter {k}={v} is not an integer"))),
    }
}

fn get_f64(p: &BTreeMap<String, String>, k: &str, default: Option<f64>) -> Result<f64, CliError> {
    match p.get(k) {
        None => default.ok_or_else(|| CliError::new(EXIT_DOMAIN, format!("missing parameter {k}"))),
        Some(v) => v
            .parse()
            .map_err(|_| CliError::new(EXIT_DOMAIN, format!("parameter {k}={v} is not a number"))),
    }
}

fn get_list(p: &BTreeMap<String, String>, k: &str) -> Result<Vec<f64>, CliError> {
    let v = need(p, k)?;
    v.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::new(EXIT_DOMAIN, format!("list entry {s:?} in {k} is not a number")))
        })
        .collect()
}

fn exact_log2(len: usize, what: &str) -> Result<usize, CliError> {
    if len == 0 || len & (len - 1) != 0 {
        return Err(CliError::new(
            EXIT_DOMAIN,
            format!("{what} must have power-of-two length, got {len}"),
        ));
    }
    Ok(len.trailing_zeros() as usize)
}

fn grid_from(p: &BTreeMap<String, String>) -> Result<GridSpec, CliError> {
    Ok(GridSpec {
        n: get_usize(p, "n", None)?,
        a: get_f64(p, "a", Some(-1.0))?,
        b: get_f64(p, "b", Some(1.0))?,
    })
}

#[derive(Serialize)]
struct PrimitiveReport {
    name: String,
    qubits: usize,
    one_qubit: usize,
    cnot: usize,
    audit: Option<BoundCheck>,
    extra: serde_json::Value,
}

struct PrimitiveBuilt {
    circuit: Option<Circuit>,
    audit: Option<BoundCheck>,
    extra: serde_json::Value,
}

fn phase_err(e: PhaseError) -> CliError {
    let code = match e {
        PhaseError::NotConverged { .. } => EXIT_CONSTRUCTION,
        _ => EXIT_DOMAIN,
    };
    CliError::new(code, e.to_string())
}

fn poly_oracle_err(e: PolyOracleError) -> CliError {
    CliError::new(EXIT_DOMAIN, e.to_string())
}

fn build_primitive(name: &str, p: &BTreeMap<String, String>) -> Result<PrimitiveBuilt, CliError> {
    let audit_of = |c: &Circuit, formula: &str, inp: &BoundInputs| {
        check_bounds(c, formula, inp)
            .map(Some)
            .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))
    };
    let built = match name {
        "multicontrol" => {
            let m = get_usize(p, "m", None)?;
            let zeros = get_usize(p, "zeros", Some(0))?;
            if zeros > m || m == 0 {
                return Err(CliError::new(EXIT_DOMAIN, "need m >= 1 and zeros <= m"));
            }
            let anc = mcx_ancillas(m);
            let mut c = Circuit::new(m + 1 + anc);
            c.add_register("pattern", 0, m, RegKind::Data);
            c.add_register("hit", m, 1, RegKind::Flag);
            if anc > 0 {
                c.add_register("chain", m + 1, anc, RegKind::Ancilla);
            }
            let controls: Vec<Control> = (0..m).map(|q| (q, q >= zeros)).collect();
            let chain: Vec<usize> = (m + 1..m + 1 + anc).collect();
            emit_mcx(&mut c, &controls, m, &chain);
            let audit = audit_of(
                &c,
                "multicontrol",
                &BoundInputs {
                    n: m,
                    zeros,
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                circuit: Some(c),
                audit,
                extra: serde_json::json!({}),
            }
        }
        "adder" => {
            let n = get_usize(p, "n", None)?;
            if n == 0 {
                return Err(CliError::new(EXIT_DOMAIN, "need n >= 1"));
            }
            let mut c = Circuit::new(2 * n + 1);
            c.add_register("acc", 0, n, RegKind::Data);
            c.add_register("add", n, n, RegKind::Data);
            c.add_register("carry", 2 * n, 1, RegKind::Ancilla);
            let acc: Vec<usize> = (0..n).collect();
            let add: Vec<usize> = (n..2 * n).collect();
            emit_add_into(&mut c, &acc, &add, 2 * n);
            let audit = audit_of(
                &c,
                "adder",
                &BoundInputs {
                    n,
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                circuit: Some(c),
                audit,
                extra: serde_json::json!({}),
            }
        }
        "band_walker" | "banded_sparse_access" => {
            let n = get_usize(p, "n", None)?;
            let l = get_usize(p, "l", None)?;
            if n < 2 || l > n {
                return Err(CliError::new(EXIT_DOMAIN, "need n >= 2 and l <= n"));
            }
            let offsets: Vec<usize> = (0..1usize << l).collect();
            let plan = assign_slots(n, &offsets);
            let anc = banded_ancillas(n);
            let walker_only = name == "band_walker";
            let cols = if walker_only { 0 } else { n };
            let mut c = Circuit::new(n + cols + anc);
            c.add_register("row", 0, n, RegKind::Data);
            if !walker_only {
                c.add_register("col", n, n, RegKind::Data);
            }
            c.add_register("anc", n + cols, anc, RegKind::Ancilla);
            let row: Vec<usize> = (0..n).collect();
            let ancs: Vec<usize> = (n + cols..n + cols + anc).collect();
            if walker_only {
                emit_band_walker(&mut c, &row, &plan, &ancs);
            } else {
                let col: Vec<usize> = (n..2 * n).collect();
                emit_banded_oracle(&mut c, &row, &col, &plan, &ancs);
            }
            let formula = if walker_only {
                "banded_sparse_access_walker"
            } else {
                "banded_sparse_access"
            };
            let audit = audit_of(
                &c,
                formula,
                &BoundInputs {
                    n,
                    l: plan.l,
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                circuit: Some(c),
                audit,
                extra: serde_json::json!({ "l": plan.l }),
            }
        }
        "multiplexed" => {
            let thetas = get_list(p, "thetas")?;
            let l = exact_log2(thetas.len(), "thetas")?;
            let axis = match p.get("axis").map(String::as_str).unwrap_or("y") {
                "y" => RotAxis::Y,
                "z" => RotAxis::Z,
                other => {
                    return Err(CliError::new(
                        EXIT_DOMAIN,
                        format!("axis must be y or z, got {other}"),
                    ))
                }
            };
            let mut c = Circuit::new(l + 1);
            if l > 0 {
                c.add_register("select", 0, l, RegKind::Data);
            }
            c.add_register("target", l, 1, RegKind::Data);
            let select: Vec<usize> = (0..l).collect();
            emit_multiplexed(&mut c, axis, &select, l, &thetas);
            PrimitiveBuilt {
                circuit: Some(c),
                audit: None,
                extra: serde_json::json!({}),
            }
        }
        "momentum_oracle" => {
            let grid = grid_from(p)?;
            let m = get_usize(p, "m", None)?;
            let plan = momentum_plan(&grid, m);
            let mut c = Circuit::new(1 + plan.l);
            c.add_register("aflag", 0, 1, RegKind::Flag);
            if plan.l > 0 {
                c.add_register("select", 1, plan.l, RegKind::Data);
            }
            let select: Vec<usize> = (1..1 + plan.l).collect();
            let norm = emit_momentum_oracle(&mut c, 0, &select, &grid, m, &plan)
                .map_err(|e| CliError::new(EXIT_CONSTRUCTION, e.to_string()))?;
            let audit = audit_of(
                &c,
                "momentum_oracle",
                &BoundInputs {
                    l: plan.l,
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                circuit: Some(c),
                audit,
                extra: serde_json::json!({ "l": plan.l, "norm": norm }),
            }
        }
        "coordinate_superposition" => {
            let amps = get_list(p, "amps")?;
            let n = exact_log2(amps.len(), "amps")?;
            let anc_w = prep_ancillas(n);
            let mut c = Circuit::new(n + anc_w);
            c.add_register("data", 0, n, RegKind::Data);
            if anc_w > 0 {
                c.add_register("anc", n, anc_w, RegKind::Ancilla);
            }
            let data: Vec<usize> = (0..n).collect();
            let anc: Vec<usize> = (n..n + anc_w).collect();
            let chi = emit_weighted_prep(&mut c, &data, &anc, &amps)
                .map_err(|e| CliError::new(EXIT_DOMAIN, e.to_string()))?;
            let audit = audit_of(
                &c,
                "coordinate_superposition",
                &BoundInputs {
                    n,
                    chi,
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                circuit: Some(c),
                audit,
                extra: serde_json::json!({ "chi": chi }),
            }
        }
        "state_prep" => {
            let amps = get_list(p, "amps")?;
            let n = exact_log2(amps.len(), "amps")?;
            let mut c = Circuit::new(n.max(1));
            c.add_register("data", 0, n.max(1), RegKind::Data);
            let data: Vec<usize> = (0..n.max(1)).collect();
            let camps: Vec<Complex64> = if n == 0 {
                vec![Complex64::new(amps[0], 0.0), Complex64::new(0.0, 0.0)]
            } else {
                amps.iter().map(|v| Complex64::new(*v, 0.0)).collect()
            };
            emit_state_prep(&mut c, &data, &camps);
            PrimitiveBuilt {
                circuit: Some(c),
                audit: None,
                extra: serde_json::json!({}),
            }
        }
        "x_encoding" => {
            let grid = grid_from(p)?;
            grid.validate()
                .map_err(|e| CliError::new(EXIT_DOMAIN, e.to_string()))?;
            let be = build_x_encoding(&grid).map_err(poly_oracle_err)?;
            let audit = audit_of(
                &be.circuit,
                "amplitude_oracle_x",
                &BoundInputs {
                    n: grid.n,
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                extra: serde_json::json!({ "alpha": be.alpha, "eps": be.eps }),
                circuit: Some(be.circuit),
                audit,
            }
        }
        "poly_oracle" => {
            let grid = grid_from(p)?;
            grid.validate()
                .map_err(|e| CliError::new(EXIT_DOMAIN, e.to_string()))?;
            let coeffs = get_list(p, "coeffs")?;
            let oracle = build_poly_oracle(&grid, &coeffs).map_err(poly_oracle_err)?;
            let audit = audit_of(
                &oracle.encoding.circuit,
                "coordinate_polynomial_oracle",
                &BoundInputs {
                    n: grid.n,
                    q: coeffs.len().saturating_sub(1),
                    ..Default::default()
                },
            )?;
            PrimitiveBuilt {
                extra: serde_json::json!({
                    "c_p": oracle.c_p,
                    "alpha": oracle.encoding.alpha,
                    "eps": oracle.encoding.eps,
                }),
                circuit: Some(oracle.encoding.circuit),
                audit,
            }
        }
        "diag_real" | "diag_complex" => {
            let amps = get_list(p, "amps")?;
            let h = exact_log2(amps.len(), "amps")?;
            if h == 0 {
                return Err(CliError::new(EXIT_DOMAIN, "need at least two amplitudes"));
            }
            let mut prep = Circuit::new(h);
            let data: Vec<usize> = (0..h).collect();
            let camps: Vec<Complex64> = amps.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            emit_state_prep(&mut prep, &data, &camps);
            let c = if name == "diag_real" {
                build_real_diag(&prep, h)
            } else {
                build_complex_diag(&prep, h)
            };
            PrimitiveBuilt {
                circuit: Some(c),
                audit: None,
                extra: serde_json::json!({}),
            }
        }
        "phases" => {
            let coeffs = get_list(p, "coeffs")?;
            let seq = solve_phases(&coeffs).map_err(phase_err)?;
            PrimitiveBuilt {
                circuit: None,
                audit: None,
                extra: serde_json::json!({ "phis": seq.phis, "residual": seq.residual }),
            }
        }
        other => {
            return Err(CliError::new(
                EXIT_DOMAIN,
                format!(
                    "unknown primitive {other:?}; available: multicontrol, adder, band_walker, \
                     banded_sparse_access, multiplexed, momentum_oracle, coordinate_superposition, \
                     state_prep, x_encoding, poly_oracle, diag_real, diag_complex, phases"
                ),
            ))
        }
    };
    Ok(built)
}

fn cmd_primitive(a: &PrimitiveArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let p = parse_params(&a.params)?;
    let built = build_primitive(&a.name, &p)?;
    let (qubits, one_qubit, cnot) = match &built.circuit {
        Some(c) => (c.n_qubits, c.count_1q(), c.count_cx()),
        None => (0, 0, 0),
    };
    let report = PrimitiveReport {
        name: a.name.clone(),
        qubits,
        one_qubit,
        cnot,
        audit: built.audit,
        extra: built.extra,
    };
    print!("{}", pretty(&report)?);
    if let Some(out) = &a.out {
        let c = built.circuit.as_ref().ok_or_else(|| {
            CliError::new(EXIT_DOMAIN, format!("{} produces no circuit", a.name))
        })?;
        write_atomic(out, c.to_text().as_bytes())?;
        write_manifest(&manifest_path_of(out), "primitive", None, &[], &[out], started)?;
    }
    Ok(())
}

/// Command-line entry point; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_SCHEMA,
            };
        }
    };
    let result = match &cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Evolve(a) => cmd_evolve(a),
        Cmd::Count(a) => cmd_count(a),
        Cmd::Primitive(a) => cmd_primitive(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law_is_the_exponent() {
        let ns = [3.0, 4.0, 5.0, 6.0, 7.0];
        let ys: Vec<f64> = ns.iter().map(|n| 5.0 * n * n).collect();
        assert!((loglog_slope(&ns, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join("hamforge_cli_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn param_parsing_and_lookup() {
        let p = parse_params(&["n=4".into(), "coeffs=0,0.5,0".into()]).unwrap();
        assert_eq!(get_usize(&p, "n", None).unwrap(), 4);
        assert_eq!(get_list(&p, "coeffs").unwrap(), vec![0.0, 0.5, 0.0]);
        assert_eq!(get_f64(&p, "a", Some(-1.0)).unwrap(), -1.0);
        assert!(parse_params(&["oops".into()]).is_err());
    }
}
