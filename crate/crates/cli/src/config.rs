//! Job options from flags and an optional JSON file. Flags win over the file,
//! the file wins over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fsl::funcs::{builtin, FunctionDef};
use fsl::fourier;
use fsl::{FanOut, FslPlan, GridFunction, Loader, NonPeriodic, Simulator};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoaderArg {
    Ucr,
    Schmidt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FanOutArg {
    Tree,
    Sequential,
}

/// `auto` mirrors functions flagged as non-periodic when that truncates better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorArg {
    Auto,
    None,
    Disentangle,
    Measure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Qasm,
    Csv,
}

#[derive(Args, Debug, Default, Clone)]
pub struct JobArgs {
    /// JSON file with any of the options below (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin function name.
    #[arg(long, conflicts_with = "expr")]
    pub function: Option<String>,
    /// Expression in `x` (and `y` for two dimensions).
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long)]
    pub dims: Option<usize>,
    /// Qubits per dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Window exponent: frequencies |k| < 2^m are kept.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub loader: Option<LoaderArg>,
    /// Lanczos filter exponent.
    #[arg(long)]
    pub filter: Option<f64>,
    #[arg(long, value_enum)]
    pub nonperiodic: Option<MirrorArg>,
    /// Load the square root of the function.
    #[arg(long)]
    pub sqrt: bool,
    /// Function parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[arg(long, value_enum)]
    pub fanout: Option<FanOutArg>,
    /// Synthesize opaque Schmidt blocks into gates.
    #[arg(long)]
    pub decompose: bool,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub emit: Vec<Emit>,
    /// Record wall-clock compile time in reports.
    #[arg(long)]
    pub timing: bool,
    /// Inclusive window range for sweeps, `LO:HI`.
    #[arg(long)]
    pub m_range: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    function: Option<String>,
    expr: Option<String>,
    dims: Option<usize>,
    n: Option<usize>,
    m: Option<usize>,
    loader: Option<LoaderArg>,
    filter: Option<f64>,
    nonperiodic: Option<MirrorArg>,
    sqrt: Option<bool>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    fanout: Option<FanOutArg>,
    decompose: Option<bool>,
    shots: Option<u64>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    emit: Option<Vec<Emit>>,
    timing: Option<bool>,
    m_range: Option<(usize, usize)>,
}

/// Fully resolved options.
#[derive(Debug, Clone)]
pub struct Job {
    function: Option<String>,
    expr: Option<String>,
    dims: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub loader: Loader,
    pub filter: Option<f64>,
    mirror: MirrorArg,
    sqrt: bool,
    params: BTreeMap<String, f64>,
    pub fan_out: FanOut,
    pub decompose: bool,
    pub shots: Option<u64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub emit: Vec<Emit>,
    pub timing: bool,
    pub m_range: Option<(usize, usize)>,
}

fn parse_param(s: &str) -> CliResult<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::config(format!("--param expects NAME=VALUE, got '{s}'")))?;
    let v: f64 = v.trim().parse().map_err(|_| CliError::config(format!("parameter {k} has a non-numeric value '{v}'")))?;
    Ok((k.trim().to_string(), v))
}

fn parse_range(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::config(format!("--m-range expects LO:HI, got '{s}'"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn read_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
}

impl JobArgs {
    pub fn resolve(&self) -> CliResult<Job> {
        let file = match &self.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let mut params = file.params;
        for p in &self.params {
            let (k, v) = parse_param(p)?;
            params.insert(k, v);
        }
        // A flag-level source replaces both file-level sources.
        let (function, expr) = if self.function.is_some() || self.expr.is_some() {
            (self.function.clone(), self.expr.clone())
        } else {
            (file.function, file.expr)
        };
        if function.is_some() && expr.is_some() {
            return Err(CliError::config("give either a function or an expression, not both"));
        }
        let m_range = match &self.m_range {
            Some(s) => Some(parse_range(s)?),
            None => file.m_range,
        };
        let loader = match self.loader.or(file.loader).unwrap_or(LoaderArg::Ucr) {
            LoaderArg::Ucr => Loader::Ucr,
            LoaderArg::Schmidt => Loader::Schmidt,
        };
        let fan_out = match self.fanout.or(file.fanout).unwrap_or(FanOutArg::Tree) {
            FanOutArg::Tree => FanOut::Tree,
            FanOutArg::Sequential => FanOut::Sequential,
        };
        let mut emit = if self.emit.is_empty() { file.emit.unwrap_or_else(|| vec![Emit::Json]) } else { self.emit.clone() };
        emit.sort();
        emit.dedup();
        Ok(Job {
            function,
            expr,
            dims: self.dims.or(file.dims),
            n: self.n.or(file.n),
            m: self.m.or(file.m),
            loader,
            filter: self.filter.or(file.filter),
            mirror: self.nonperiodic.or(file.nonperiodic).unwrap_or(MirrorArg::Auto),
            sqrt: self.sqrt || file.sqrt.unwrap_or(false),
            params,
            fan_out,
            decompose: self.decompose || file.decompose.unwrap_or(false),
            shots: self.shots.or(file.shots),
            seed: self.seed.or(file.seed).unwrap_or(0),
            out_dir: self.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
            emit,
            timing: self.timing || file.timing.unwrap_or(false),
            m_range,
        })
    }
}

impl Job {
    pub fn wants(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    pub fn has_source(&self) -> bool {
        self.function.is_some() || self.expr.is_some()
    }

    /// The target function with overrides, dimension check and sqrt mode applied.
    pub fn function_def(&self) -> CliResult<FunctionDef> {
        let def = match (&self.function, &self.expr) {
            (Some(name), None) => builtin(name, &self.params)?,
            (None, Some(src)) => {
                if !self.params.is_empty() {
                    return Err(CliError::config("--param applies to builtin functions only"));
                }
                let dims = match self.dims {
                    Some(d) => d,
                    None => fsl::funcs::Expr::parse(src)?.min_dims(),
                };
                FunctionDef::from_expr(src, dims)?
            }
            _ => return Err(CliError::config("no target: pass --function NAME or --expr EXPR")),
        };
        if let Some(d) = self.dims {
            if d != def.dims {
                return Err(fsl::FslError::DimensionMismatch { expected: def.dims, found: d }.into());
            }
        }
        Ok(def.with_sqrt_mode(self.sqrt))
    }

    /// Benchmark target when none is given: `xpowx` on twenty qubits.
    pub fn fill_bench_defaults(&mut self) {
        if !self.has_source() {
            self.function = Some("xpowx".into());
        }
        self.n.get_or_insert(20);
        self.m_range.get_or_insert((2, 10));
    }

    pub fn required_n(&self) -> CliResult<usize> {
        self.n.ok_or_else(|| CliError::config("--n is required"))
    }

    pub fn required_m(&self) -> CliResult<usize> {
        self.m.ok_or_else(|| CliError::config("--m is required"))
    }

    /// Plan for the sampled `def` at window `m`; capacity follows the simulator's.
    pub fn plan(&self, def: &FunctionDef, grid: &GridFunction, m: usize) -> CliResult<FslPlan> {
        let nonperiodic = match self.mirror {
            MirrorArg::Auto if def.prefers_mirror && mirror_wins(grid, m)? => Some(NonPeriodic::Disentangle),
            MirrorArg::Auto | MirrorArg::None => None,
            MirrorArg::Disentangle => Some(NonPeriodic::Disentangle),
            MirrorArg::Measure => Some(NonPeriodic::Measure),
        };
        Ok(FslPlan {
            dims: def.dims,
            n: grid.n(),
            m,
            loader: self.loader,
            filter: self.filter,
            nonperiodic,
            fan_out: self.fan_out,
            max_qubits: capacity(),
            decompose_opaque: self.decompose,
        })
    }
}

/// Whether mirroring truncates strictly better than loading directly. The
/// mirror halves the resolution per retained frequency, so small windows
/// often favour the direct grid.
fn mirror_wins(grid: &GridFunction, m: usize) -> CliResult<bool> {
    if grid.dims() != 1 || m >= grid.n() {
        return Ok(false);
    }
    let direct = fourier::exact_infidelity(&fourier::dft_coefficients(grid)?, m);
    let mirrored = fourier::exact_infidelity(&fourier::dft_coefficients(&fourier::mirror_extend(grid)?)?, m);
    Ok(mirrored < direct)
}

/// Qubit capacity shared by compilation and simulation (`FSL_MAX_QUBITS` or 24).
pub fn capacity() -> usize {
    Simulator::default().max_qubits
}
