use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fsl::compile::{compile_function, data_register, measured_data_distribution};
use fsl::fourier::{self, mirror_extend};
use fsl::frqi::{compile_frqi, frqi_target, GrayImage};
use fsl::funcs::{sample, FunctionDef};
use fsl::sim::{classical_fidelity, sample as sample_shots};
use fsl::synth::decompose_opaque;
use fsl::{Circuit, CompileReport, FslError, FslPlan, GridFunction, Loader, NonPeriodic, Simulator, Statevector};
use serde_json::{json, Value};

use crate::config::{capacity, Emit, Job};
use crate::error::{CliError, CliResult};

/// Files written by a command, echoed to stdout as JSON.
#[derive(Default)]
pub struct Written(Vec<PathBuf>);

impl Written {
    fn file(&mut self, dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        self.0.push(path);
        Ok(())
    }

    pub fn summary(&self) -> String {
        let paths: Vec<String> = self.0.iter().map(|p| p.display().to_string()).collect();
        json!({ "written": paths }).to_string()
    }
}

fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Report as JSON; wall time only when timing was requested, so that
/// repeated runs produce identical bytes.
fn report_json(report: &CompileReport, timing: bool) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if !timing {
        v.as_object_mut().expect("report is an object").remove("compile_wall_time");
    }
    v
}

fn target_json(def: &FunctionDef) -> Value {
    json!({ "function": def.name, "dims": def.dims, "params": def.params, "sqrt_mode": def.sqrt_mode })
}

fn write_circuit(out: &mut Written, job: &Job, circuit: &Circuit) -> CliResult<()> {
    if job.wants(Emit::Json) {
        out.file(&job.out_dir, "circuit.json", circuit.to_json_string() + "\n")?;
    }
    if job.wants(Emit::Qasm) {
        out.file(&job.out_dir, "circuit.qasm", circuit.export_qasm()?)?;
    }
    Ok(())
}

struct Compiled {
    def: FunctionDef,
    grid: GridFunction,
    plan: FslPlan,
    circuit: Circuit,
    report: CompileReport,
}

fn compile_job(job: &Job, m: usize) -> CliResult<Compiled> {
    let def = job.function_def()?;
    let n = job.required_n()?;
    // Check capacity before sampling allocates the full grid.
    FslPlan { max_qubits: capacity(), ..FslPlan::new(def.dims, n, m) }.validate()?;
    let grid = sample(&def, n)?;
    let plan = job.plan(&def, &grid, m)?;
    plan.validate()?;
    let (circuit, report) = compile_function(&grid, &plan)?;
    Ok(Compiled { def, grid, plan, circuit, report })
}

pub fn compile(job: &Job) -> CliResult<Written> {
    let c = compile_job(job, job.required_m()?)?;
    let mut out = Written::default();
    write_circuit(&mut out, job, &c.circuit)?;
    if job.wants(Emit::Json) {
        let doc = json!({ "target": target_json(&c.def), "plan": c.plan, "report": report_json(&c.report, job.timing) });
        out.file(&job.out_dir, "report.json", pretty(&doc))?;
    }
    Ok(out)
}

fn read_circuit(path: &Path) -> CliResult<Circuit> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    Circuit::from_json_str(&text).map_err(CliError::input)
}

fn read_state(path: &Path) -> CliResult<Statevector> {
    let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    Statevector::from_le_bytes(&bytes).map_err(CliError::input)
}

/// Folds the mirror ancilla back into the data register: outcome `(1, k)`
/// is recorded as `(0, 2^n − 1 − k)`.
fn fold_mirror(dist: &[f64]) -> Vec<f64> {
    let half = dist.len() / 2;
    (0..half).map(|k| dist[k] + dist[half + (half - 1 - k)]).collect()
}

pub struct SimulateArgs<'a> {
    pub circuit: Option<&'a Path>,
    pub target: Option<&'a Path>,
    pub save_state: bool,
}

pub fn simulate(job: &Job, args: SimulateArgs) -> CliResult<Written> {
    let sim = Simulator::default();
    let mut doc = serde_json::Map::new();
    let (circuit, compiled) = match args.circuit {
        Some(p) => (read_circuit(p)?, None),
        None => {
            let c = compile_job(job, job.required_m()?)?;
            doc.insert("target".into(), target_json(&c.def));
            doc.insert("report".into(), report_json(&c.report, job.timing));
            (c.circuit.clone(), Some(c))
        }
    };
    let state = sim.run_from_zero(&circuit)?;
    doc.insert("num_qubits".into(), json!(circuit.num_qubits()));

    // Reference distribution for the shot histogram, folded the same way as the samples.
    let mut reference: Vec<f64> = state.probabilities();
    let mut fold = false;
    if let Some(c) = &compiled {
        let want = Statevector::from_amplitudes(c.grid.samples().to_vec())?;
        reference = want.probabilities();
        match c.plan.nonperiodic {
            None => {
                doc.insert("fidelity".into(), json!(state.fidelity(&want)?));
            }
            Some(NonPeriodic::Disentangle) => {
                let (p0, data) = data_register(&state)?;
                doc.insert("ancilla_zero_probability".into(), json!(p0));
                doc.insert("fidelity".into(), json!(data.fidelity(&want)?));
                // Shots see the ancilla too; ideally it always reads 0.
                reference.resize(state.amplitudes().len(), 0.0);
            }
            Some(NonPeriodic::Measure) => {
                fold = true;
                let dist = measured_data_distribution(&state);
                doc.insert("classical_fidelity_exact".into(), json!(classical_fidelity(&dist, &reference)?));
            }
        }
    }
    if let Some(path) = args.target {
        let target = read_state(path)?;
        if target.num_qubits() != state.num_qubits() {
            return Err(FslError::DimensionMismatch { expected: state.num_qubits(), found: target.num_qubits() }.into());
        }
        doc.insert("target_fidelity".into(), json!(state.fidelity(&target)?));
        reference = target.probabilities();
        fold = false;
    }

    let mut out = Written::default();
    if let Some(shots) = job.shots {
        let hist = sample_shots(&state, shots, job.seed)?;
        let mut dist = hist.distribution(state.amplitudes().len());
        if fold {
            dist = fold_mirror(&dist);
        }
        doc.insert("shots".into(), json!(shots));
        doc.insert("seed".into(), json!(job.seed));
        doc.insert("classical_fidelity".into(), json!(classical_fidelity(&dist, &reference)?));
        out.file(&job.out_dir, "histogram.csv", hist.to_csv())?;
    }
    if args.save_state {
        out.file(&job.out_dir, "state.bin", state.to_le_bytes())?;
    }
    out.file(&job.out_dir, "simulation.json", pretty(&Value::Object(doc)))?;
    Ok(out)
}

/// The grid whose spectrum the plan truncates.
fn loaded_grid(grid: &GridFunction, plan: &FslPlan) -> CliResult<GridFunction> {
    Ok(if plan.nonperiodic.is_some() { mirror_extend(grid)? } else { grid.clone() })
}

pub const SWEEP_HEADER: &str = "m,exact_infidelity,bound,depth,single_qubit,two_qubit,compile_seconds";

pub fn sweep(job: &Job) -> CliResult<Written> {
    let (lo, hi) = job.m_range.ok_or_else(|| CliError::config("--m-range LO:HI is required"))?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut slope_input = None;
    for m in lo..=hi {
        let started = Instant::now();
        let c = compile_job(job, m)?;
        let secs = started.elapsed().as_secs_f64();
        let r = &c.report;
        let _ = writeln!(
            csv,
            "{m},{},{},{},{},{},{}",
            fmt_float(r.exact_infidelity),
            fmt_float(r.analytic_bound.unwrap_or(f64::NAN)),
            r.depth,
            r.gate_counts.single_qubit,
            r.gate_counts.two_qubit,
            fmt_float(if job.timing { secs } else { f64::NAN }),
        );
        if slope_input.is_none() && c.plan.filter.is_none() {
            slope_input = Some(loaded_grid(&c.grid, &c.plan)?);
        }
    }
    let mut out = Written::default();
    out.file(&job.out_dir, "sweep.csv", csv)?;
    if job.wants(Emit::Json) {
        let slope = slope_input.and_then(|g| fourier::decay_slope(&g, lo..=hi).ok());
        out.file(&job.out_dir, "sweep.json", pretty(&json!({ "m_range": [lo, hi], "decay_slope": slope })))?;
    }
    Ok(out)
}

pub fn export(job: &Job, circuit: &Path) -> CliResult<Written> {
    let mut c = read_circuit(circuit)?;
    if job.decompose {
        c = decompose_opaque(&c)?;
    }
    let mut out = Written::default();
    out.file(&job.out_dir, "circuit.qasm", c.export_qasm()?)?;
    if job.decompose && job.wants(Emit::Json) {
        out.file(&job.out_dir, "circuit.json", c.to_json_string() + "\n")?;
    }
    Ok(out)
}

pub fn image(job: &Job, path: &Path, simulate: bool) -> CliResult<Written> {
    let img = GrayImage::load(path).map_err(CliError::input)?;
    let m = job.required_m()?;
    let plan = FslPlan {
        loader: job.loader,
        fan_out: job.fan_out,
        decompose_opaque: job.decompose,
        max_qubits: capacity(),
        ..FslPlan::new(2, img.n(), m)
    };
    let (circuit, report) = compile_frqi(&img, &plan)?;
    let mut out = Written::default();
    write_circuit(&mut out, job, &circuit)?;
    let mut doc = json!({ "image": path.display().to_string(), "side": img.side(), "plan": plan, "report": report_json(&report, job.timing) });
    if simulate {
        let state = Simulator::default().run_from_zero(&circuit)?;
        doc["simulated_infidelity"] = json!(1.0 - state.fidelity(&frqi_target(&img))?);
    }
    out.file(&job.out_dir, "report.json", pretty(&doc))?;
    Ok(out)
}

pub const BENCH_HEADER: &str = "m,loader,num_qubits,single_qubit,two_qubit,depth,contains_opaque,compile_seconds";

/// Wall-clock compile time per window size and loader.
pub fn bench(job: &Job) -> CliResult<Written> {
    let (lo, hi) = job.m_range.ok_or_else(|| CliError::config("--m-range LO:HI is required"))?;
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for m in lo..=hi {
        for loader in [Loader::Ucr, Loader::Schmidt] {
            let mut j = job.clone();
            j.loader = loader;
            let started = Instant::now();
            let c = compile_job(&j, m)?;
            let secs = started.elapsed().as_secs_f64();
            let r = &c.report;
            let name = if loader == Loader::Ucr { "ucr" } else { "schmidt" };
            let _ = writeln!(
                csv,
                "{m},{name},{},{},{},{},{},{}",
                r.num_qubits,
                r.gate_counts.single_qubit,
                r.gate_counts.two_qubit,
                r.depth,
                r.contains_opaque,
                fmt_float(secs)
            );
        }
    }
    let mut out = Written::default();
    out.file(&job.out_dir, "bench.csv", csv)?;
    Ok(out)
}
