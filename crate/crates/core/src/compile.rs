//! End-to-end compilation of truncated Fourier series into circuits.
//!
//! Register layout for `D` dimensions of `n` qubits: dimension `d` owns
//! qubits `d·n .. (d+1)·n`; its lowest `m+1` qubits hold the coefficient
//! register, whose top qubit is the sign qubit that drives the fan-out.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateCounts, ELIDE_TOL};
use crate::error::{FslError, Result};
use crate::fourier::{self, FourierSpec, GridFunction};
use crate::sim::{Statevector, DEFAULT_MAX_QUBITS};
use crate::synth::{self, schmidt::append_schmidt_loader, ucr::append_state_loader};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loader {
    Ucr,
    Schmidt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonPeriodic {
    /// Uncompute the mirror ancilla with CNOTs and a Hadamard.
    Disentangle,
    /// Leave the ancilla; a measured 1 means the data register is bit-flipped.
    Measure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FanOut {
    /// Balanced doubling tree, depth `⌈log₂(n−m)⌉`.
    Tree,
    /// One CNOT per target straight from the sign qubit.
    Sequential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FslPlan {
    pub dims: usize,
    pub n: usize,
    pub m: usize,
    pub loader: Loader,
    /// Lanczos exponent, if filtering.
    pub filter: Option<f64>,
    pub nonperiodic: Option<NonPeriodic>,
    pub fan_out: FanOut,
    pub max_qubits: usize,
    /// Replace opaque Schmidt blocks by synthesized gates.
    pub decompose_opaque: bool,
}

impl FslPlan {
    pub fn new(dims: usize, n: usize, m: usize) -> Self {
        FslPlan {
            dims,
            n,
            m,
            loader: Loader::Ucr,
            filter: None,
            nonperiodic: None,
            fan_out: FanOut::Tree,
            max_qubits: DEFAULT_MAX_QUBITS,
            decompose_opaque: false,
        }
    }

    pub fn with_loader(mut self, loader: Loader) -> Self {
        self.loader = loader;
        self
    }

    /// Total qubits of the compiled circuit.
    pub fn num_qubits(&self) -> usize {
        self.dims * self.n + usize::from(self.nonperiodic.is_some())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 || self.n == 0 {
            return Err(FslError::InvalidPlan("dims and n must be positive".into()));
        }
        if self.m >= self.n {
            return Err(FslError::InvalidPlan(format!("m={} must be below n={}", self.m, self.n)));
        }
        if self.nonperiodic.is_some() && self.dims != 1 {
            return Err(FslError::InvalidPlan("mirror extension is one-dimensional".into()));
        }
        if let Some(a) = self.filter {
            if a.is_nan() || a <= 0.0 {
                return Err(FslError::InvalidPlan(format!("filter exponent must be positive, got {a}")));
            }
        }
        let q = self.num_qubits();
        if q > self.max_qubits {
            return Err(FslError::CapacityExceeded { requested: q, capacity: self.max_qubits });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub num_qubits: usize,
    pub depth: usize,
    /// Depth with the fan-out scheduled as a tree and as a sequential cascade.
    pub depth_tree: usize,
    pub depth_sequential: usize,
    pub gate_counts: GateCounts,
    /// Infidelity of the prepared state against the sampled target.
    pub exact_infidelity: f64,
    pub analytic_bound: Option<f64>,
    pub compile_wall_time: f64,
    /// Depth and counts treat each opaque block as one gate.
    pub contains_opaque: bool,
    pub post_processing: Option<String>,
}

fn loader_target_qubits(prefix: usize, dims: usize, n: usize, m: usize) -> Vec<usize> {
    let mut qs: Vec<usize> = (0..prefix).collect();
    for d in 0..dims {
        let base = prefix + d * n;
        qs.extend(base + n - m - 1..base + n);
    }
    qs
}

fn push_fan_out(c: &mut Circuit, base: usize, n: usize, m: usize, mode: FanOut) {
    let sign = base + n - m - 1;
    let targets: Vec<usize> = (base..sign).rev().collect();
    match mode {
        FanOut::Sequential => {
            for &t in &targets {
                c.push_logical(Gate::cnot(sign, t));
            }
        }
        FanOut::Tree => {
            let mut holders = vec![sign];
            let mut next = targets.into_iter();
            loop {
                let mut fresh = Vec::new();
                for &h in &holders {
                    match next.next() {
                        Some(t) => {
                            c.push_logical(Gate::cnot(h, t));
                            fresh.push(t);
                        }
                        None => break,
                    }
                }
                if fresh.is_empty() {
                    break;
                }
                holders.extend(fresh);
            }
        }
    }
}

/// Loader, then per-dimension fan-out and inverse QFT, with `prefix` extra
/// leading qubits that only the loader touches.
struct Assembly {
    tree: Circuit,
    sequential: Circuit,
}

struct Layout {
    prefix: usize,
    dims: usize,
    n: usize,
    m: usize,
}

fn assemble(state: &[Complex64], layout: Layout, loader: Loader, decompose: bool) -> Result<Assembly> {
    let Layout { prefix, dims, n, m } = layout;
    let total = prefix + dims * n;
    let targets = loader_target_qubits(prefix, dims, n, m);
    let mut load = Circuit::new(total);
    match loader {
        Loader::Schmidt if targets.len() >= 2 => append_schmidt_loader(&mut load, &targets, state)?,
        _ => append_state_loader(&mut load, &targets, state)?,
    }
    if decompose {
        load = synth::decompose_opaque(&load)?;
    }
    load.elide_small_rotations(ELIDE_TOL);
    load.cancel_adjacent_cnots();
    let iqft = synth::build_inverse_qft(n, true);
    let build = |mode: FanOut| {
        let mut c = load.clone();
        for d in 0..dims {
            let base = prefix + d * n;
            push_fan_out(&mut c, base, n, m, mode);
            let qs: Vec<usize> = (base..base + n).collect();
            c.append(&iqft, &qs);
        }
        c
    };
    Ok(Assembly { tree: build(FanOut::Tree), sequential: build(FanOut::Sequential) })
}

fn finish(
    assembly: Assembly,
    plan: &FslPlan,
    exact_infidelity: f64,
    analytic_bound: Option<f64>,
    post_processing: Option<String>,
    extra: impl Fn(&mut Circuit),
    started: Instant,
) -> Result<(Circuit, CompileReport)> {
    let Assembly { mut tree, mut sequential } = assembly;
    extra(&mut tree);
    extra(&mut sequential);
    let (depth_tree, depth_sequential) = (tree.depth(), sequential.depth());
    let circuit = match plan.fan_out {
        FanOut::Tree => tree,
        FanOut::Sequential => sequential,
    };
    let report = CompileReport {
        num_qubits: circuit.num_qubits(),
        depth: circuit.depth(),
        depth_tree,
        depth_sequential,
        gate_counts: circuit.gate_counts(),
        exact_infidelity: exact_infidelity.clamp(0.0, 1.0),
        analytic_bound,
        compile_wall_time: started.elapsed().as_secs_f64(),
        contains_opaque: circuit.contains_opaque(),
        post_processing,
    };
    Ok((circuit, report))
}

fn check_spec(spec: &FourierSpec, plan: &FslPlan) -> Result<()> {
    plan.validate()?;
    if spec.dims() != plan.dims {
        return Err(FslError::DimensionMismatch { expected: plan.dims, found: spec.dims() });
    }
    if spec.m() != plan.m {
        return Err(FslError::InvalidPlan(format!("spec window m={} differs from plan m={}", spec.m(), plan.m)));
    }
    Ok(())
}

/// Infidelity against the source of `spec` after optionally filtering it.
fn filtered(spec: &FourierSpec, filter: Option<f64>) -> Result<(FourierSpec, f64)> {
    match filter {
        None => Ok((spec.clone(), spec.tail_mass())),
        Some(a) => {
            let f = spec.lanczos_filter(a)?;
            let scale = spec.norm_constant().sqrt();
            let overlap: Complex64 = spec.coeffs().iter().zip(f.coeffs()).map(|(c, g)| (c * scale).conj() * g).sum();
            Ok((f, 1.0 - overlap.norm_sqr()))
        }
    }
}

/// One-dimensional compile of a truncated spectrum.
pub fn compile_1d(spec: &FourierSpec, plan: &FslPlan) -> Result<(Circuit, CompileReport)> {
    if spec.dims() != 1 {
        return Err(FslError::DimensionMismatch { expected: 1, found: spec.dims() });
    }
    compile_spec(spec, plan)
}

/// Multi-dimensional compile: one loader over all coefficient registers.
pub fn compile_nd(spec: &FourierSpec, plan: &FslPlan) -> Result<(Circuit, CompileReport)> {
    compile_spec(spec, plan)
}

fn compile_spec(spec: &FourierSpec, plan: &FslPlan) -> Result<(Circuit, CompileReport)> {
    let started = Instant::now();
    let plan = FslPlan { nonperiodic: None, ..plan.clone() };
    check_spec(spec, &plan)?;
    let (spec, eps) = filtered(spec, plan.filter)?;
    let asm = assemble(&spec.coefficient_state(), Layout { prefix: 0, dims: plan.dims, n: plan.n, m: plan.m }, plan.loader, plan.decompose_opaque)?;
    finish(asm, &plan, eps, None, None, |_| {}, started)
}

pub const MEASURE_RULE: &str = "if qubit 0 reads 1, flip every data bit (index k -> 2^n - 1 - k)";

/// Compiles `g` through its mirror extension on `n+1` qubits; qubit 0 is the ancilla.
pub fn compile_nonperiodic(g: &GridFunction, plan: &FslPlan, variant: NonPeriodic) -> Result<(Circuit, CompileReport)> {
    let started = Instant::now();
    let plan = FslPlan { nonperiodic: Some(variant), ..plan.clone() };
    plan.validate()?;
    if g.dims() != 1 || g.n() != plan.n {
        return Err(FslError::DimensionMismatch { expected: plan.n, found: g.n() });
    }
    let mirrored = fourier::mirror_extend(g)?;
    let spectrum = fourier::dft_coefficients(&mirrored)?;
    let spec = fourier::truncate(&spectrum, plan.m)?;
    let (spec, eps) = filtered(&spec, plan.filter)?;
    let n = plan.n;
    let bound = fourier::infidelity_bound(&mirrored, plan.m, 0).ok();
    let asm = assemble(&spec.coefficient_state(), Layout { prefix: 0, dims: 1, n: n + 1, m: plan.m }, plan.loader, plan.decompose_opaque)?;
    let (rule, disentangle) = match variant {
        NonPeriodic::Disentangle => (None, true),
        NonPeriodic::Measure => (Some(MEASURE_RULE.to_string()), false),
    };
    let extra = move |c: &mut Circuit| {
        if disentangle {
            for i in 1..=n {
                c.push_logical(Gate::cnot(0, i));
            }
            c.push_logical(Gate::h(0));
        }
    };
    finish(asm, &plan, eps, bound, rule, extra, started)
}

/// Samples → spectrum → truncation → circuit, following `plan`.
pub fn compile_function(g: &GridFunction, plan: &FslPlan) -> Result<(Circuit, CompileReport)> {
    if let Some(variant) = plan.nonperiodic {
        return compile_nonperiodic(g, plan, variant);
    }
    let started = Instant::now();
    plan.validate()?;
    if g.dims() != plan.dims || g.n() != plan.n {
        return Err(FslError::DimensionMismatch { expected: plan.dims * plan.n, found: g.dims() * g.n() });
    }
    let spectrum = fourier::dft_coefficients(g)?;
    let spec = fourier::truncate(&spectrum, plan.m)?;
    let bound = if plan.dims == 1 { fourier::infidelity_bound(g, plan.m, 0).ok() } else { None };
    let (spec, eps) = filtered(&spec, plan.filter)?;
    let asm = assemble(&spec.coefficient_state(), Layout { prefix: 0, dims: plan.dims, n: plan.n, m: plan.m }, plan.loader, plan.decompose_opaque)?;
    finish(asm, plan, eps, bound, None, |_| {}, started)
}

/// Like [`compile_spec`] but with `prefix` leading qubits that only the loader
/// touches; `state` spans the prefix plus every coefficient register.
pub(crate) fn compile_prefixed(
    state: &[Complex64],
    prefix: usize,
    plan: &FslPlan,
    exact_infidelity: f64,
    extra: impl Fn(&mut Circuit),
) -> Result<(Circuit, CompileReport)> {
    let started = Instant::now();
    let layout = Layout { prefix, dims: plan.dims, n: plan.n, m: plan.m };
    let asm = assemble(state, layout, plan.loader, plan.decompose_opaque)?;
    finish(asm, plan, exact_infidelity, None, None, extra, started)
}

/// The truncated series evaluated directly on every grid point and normalized.
///
/// Evaluated axis by axis: each pass replaces one window axis of `2^{m+1}−1`
/// frequencies with `2^n` grid points using a table of `2^n`-th roots of unity.
pub fn target_state(spec: &FourierSpec, n: usize) -> Result<Statevector> {
    if spec.m() >= n {
        return Err(FslError::InvalidArgument(format!("m={} must be below n={n}", spec.m())));
    }
    let dims = spec.dims();
    let side = 1usize << n;
    let w = fourier::window_width(spec.m());
    let mf = spec.max_frequency();
    let roots: Vec<Complex64> =
        (0..side).map(|j| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 / side as f64)).collect();
    let mut shape = vec![w; dims];
    let mut data = spec.coeffs().to_vec();
    for axis in 0..dims {
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); outer * side * inner];
        for o in 0..outer {
            for i in 0..inner {
                for (kpos, k) in (-mf..=mf).enumerate() {
                    let c = data[(o * w + kpos) * inner + i];
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let kk = k.rem_euclid(side as i64) as usize;
                    for x in 0..side {
                        next[(o * side + x) * inner + i] += c * roots[(kk * x) % side];
                    }
                }
            }
        }
        shape[axis] = side;
        data = next;
    }
    Statevector::normalized(data)
}

/// Ancilla-free data state after the disentangling variant: `|0⟩|f⟩ ↦ |f⟩`.
pub fn data_register(state: &Statevector) -> Result<(f64, Statevector)> {
    let (p, rest) = state.project_qubit(0, false);
    rest.map(|s| (p, s)).ok_or_else(|| FslError::InvalidArgument("ancilla never reads 0".into()))
}

/// Applies the measurement variant's classical correction to a full state:
/// branches with ancilla 1 are bit-flipped and merged, giving the data distribution.
pub fn measured_data_distribution(state: &Statevector) -> Vec<f64> {
    let probs = state.probabilities();
    let half = probs.len() / 2;
    (0..half).map(|k| probs[k] + probs[half + (half - 1 - k)]).collect()
}
