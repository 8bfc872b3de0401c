//! Gate-level circuit IR: metrics, inversion, composition, peephole passes,
//! OpenQASM 2.0 export and a JSON interchange format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FslError, Result};
use crate::linalg::{ensure_unitary, CMatrix};

/// Rotations with `|angle|` below this are treated as identity by [`Circuit::elide_small_rotations`].
pub const ELIDE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    /// `exp(-iθY/2)`
    Ry(f64),
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz(f64),
    /// `diag(1, e^{iθ})`
    Phase(f64),
    Cnot,
    /// `diag(1, 1, 1, e^{iθ})`, symmetric in its two qubits.
    CPhase(f64),
    Swap,
    /// Dense unitary; `qubits[0]` is the most significant bit of its local index.
    Opaque { label: String, matrix: CMatrix },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Phase(_) => "PHASE",
            GateKind::Cnot => "CNOT",
            GateKind::CPhase(_) => "CPHASE",
            GateKind::Swap => "SWAP",
            GateKind::Opaque { .. } => "OPAQUE_UNITARY",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) | GateKind::CPhase(a) => Some(a),
            _ => None,
        }
    }

    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::H | GateKind::X | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Phase(_) => Some(1),
            GateKind::Cnot | GateKind::CPhase(_) | GateKind::Swap => Some(2),
            GateKind::Opaque { .. } => None,
        }
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, GateKind::Rz(_) | GateKind::Phase(_) | GateKind::CPhase(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn h(q: usize) -> Self {
        Gate { kind: GateKind::H, qubits: vec![q] }
    }
    pub fn x(q: usize) -> Self {
        Gate { kind: GateKind::X, qubits: vec![q] }
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Gate { kind: GateKind::Ry(theta), qubits: vec![q] }
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Gate { kind: GateKind::Rz(theta), qubits: vec![q] }
    }
    pub fn phase(q: usize, theta: f64) -> Self {
        Gate { kind: GateKind::Phase(theta), qubits: vec![q] }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, qubits: vec![control, target] }
    }
    pub fn cphase(a: usize, b: usize, theta: f64) -> Self {
        Gate { kind: GateKind::CPhase(theta), qubits: vec![a, b] }
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Swap, qubits: vec![a, b] }
    }

    pub fn opaque(label: impl Into<String>, matrix: CMatrix, qubits: Vec<usize>) -> Result<Self> {
        let g = Gate { kind: GateKind::Opaque { label: label.into(), matrix }, qubits };
        g.validate(usize::MAX)?;
        Ok(g)
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if let Some(expected) = self.kind.arity() {
            if self.qubits.len() != expected {
                return Err(FslError::InvalidGate(format!(
                    "{} takes {expected} qubit(s), got {}",
                    self.kind.name(),
                    self.qubits.len()
                )));
            }
        }
        if let Some(a) = self.kind.angle() {
            if !a.is_finite() {
                return Err(FslError::InvalidGate(format!("{} angle is not finite", self.kind.name())));
            }
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(FslError::InvalidGate(format!("qubit {q} out of range {num_qubits}")));
            }
            if self.qubits[..i].contains(&q) {
                return Err(FslError::InvalidGate(format!("qubit {q} repeated")));
            }
        }
        if let GateKind::Opaque { matrix, .. } = &self.kind {
            if self.qubits.is_empty() || self.qubits.len() > 30 {
                return Err(FslError::InvalidGate("opaque gate arity out of range".into()));
            }
            let dim = 1usize << self.qubits.len();
            if matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(FslError::InvalidGate(format!(
                    "opaque matrix is {}x{}, expected {dim}x{dim}",
                    matrix.nrows(),
                    matrix.ncols()
                )));
            }
            ensure_unitary(matrix, 1e-10)?;
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Ry(a) => GateKind::Ry(-a),
            GateKind::Rz(a) => GateKind::Rz(-a),
            GateKind::Phase(a) => GateKind::Phase(-a),
            GateKind::CPhase(a) => GateKind::CPhase(-a),
            GateKind::Opaque { label, matrix } => GateKind::Opaque {
                label: inverse_label(label),
                matrix: matrix.adjoint(),
            },
            k => k.clone(),
        };
        Gate { kind, qubits: self.qubits.clone() }
    }

    /// Dense matrix over the gate's own qubits, `qubits[0]` most significant.
    pub fn matrix(&self) -> CMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match &self.kind {
            GateKind::H => CMatrix::from_row_slice(
                2,
                2,
                &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.), c(-FRAC_1_SQRT_2, 0.)],
            ),
            GateKind::X => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)])
            }
            GateKind::Rz(t) => CMatrix::from_row_slice(
                2,
                2,
                &[Complex64::from_polar(1.0, -t / 2.0), c(0., 0.), c(0., 0.), Complex64::from_polar(1.0, t / 2.0)],
            ),
            GateKind::Phase(t) => {
                CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), Complex64::from_polar(1.0, *t)])
            }
            GateKind::Cnot => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = c(1., 0.);
                m[(1, 1)] = c(1., 0.);
                m[(2, 3)] = c(1., 0.);
                m[(3, 2)] = c(1., 0.);
                m
            }
            GateKind::CPhase(t) => {
                let mut m = CMatrix::identity(4, 4);
                m[(3, 3)] = Complex64::from_polar(1.0, *t);
                m
            }
            GateKind::Swap => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = c(1., 0.);
                m[(1, 2)] = c(1., 0.);
                m[(2, 1)] = c(1., 0.);
                m[(3, 3)] = c(1., 0.);
                m
            }
            GateKind::Opaque { matrix, .. } => matrix.clone(),
        }
    }

    fn relabeled(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate { kind: self.kind.clone(), qubits: self.qubits.iter().map(|&q| map(q)).collect() }
    }
}

fn inverse_label(label: &str) -> String {
    match label.strip_suffix('\u{2020}') {
        Some(base) => base.to_string(),
        None => format!("{label}\u{2020}"),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub opaque: usize,
    pub by_kind: BTreeMap<String, usize>,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.single_qubit + self.two_qubit + self.opaque
    }
}

/// A gate list plus the final logical-to-physical wire map.
///
/// `output_permutation[i]` is the wire that holds logical qubit `i` once all
/// gates have run. Gates always address physical wires.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    output_permutation: Vec<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, gates: Vec::new(), output_permutation: (0..num_qubits).collect() }
    }

    pub fn from_parts(num_qubits: usize, gates: Vec<Gate>, output_permutation: Vec<usize>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(FslError::InvalidArgument("circuit needs at least one qubit".into()));
        }
        for g in &gates {
            g.validate(num_qubits)?;
        }
        if !is_permutation(&output_permutation, num_qubits) {
            return Err(FslError::InvalidArgument("output_permutation is not a permutation".into()));
        }
        Ok(Circuit { num_qubits, gates, output_permutation })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output_permutation(&self) -> &[usize] {
        &self.output_permutation
    }

    pub fn has_identity_permutation(&self) -> bool {
        self.output_permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Appends a gate on physical wires.
    ///
    /// # Panics
    /// If the gate is malformed for this circuit; builders in this crate only
    /// emit well-formed gates, external input goes through [`Circuit::from_parts`].
    pub fn push(&mut self, gate: Gate) {
        if let Err(e) = gate.validate(self.num_qubits) {
            panic!("malformed gate {:?}: {e}", gate.kind.name());
        }
        self.gates.push(gate);
    }

    /// Appends a gate addressed by logical qubits, routed through the current permutation.
    pub fn push_logical(&mut self, gate: Gate) {
        let perm = &self.output_permutation;
        let g = gate.relabeled(|q| perm[q]);
        self.push(g);
    }

    /// Appends `other`, whose qubit `j` is this circuit's logical qubit `qubits[j]`.
    pub fn append(&mut self, other: &Circuit, qubits: &[usize]) {
        assert_eq!(qubits.len(), other.num_qubits, "qubit map length");
        let wire: Vec<usize> = qubits.iter().map(|&q| self.output_permutation[q]).collect();
        for g in &other.gates {
            self.push(g.relabeled(|q| wire[q]));
        }
        let old = self.output_permutation.clone();
        for (j, &q) in qubits.iter().enumerate() {
            self.output_permutation[q] = old[qubits[other.output_permutation[j]]];
        }
    }

    /// Sequential composition `self` then `other` on the same register.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit> {
        if self.num_qubits != other.num_qubits {
            return Err(FslError::DimensionMismatch { expected: self.num_qubits, found: other.num_qubits });
        }
        let mut out = self.clone();
        let ids: Vec<usize> = (0..self.num_qubits).collect();
        out.append(other, &ids);
        Ok(out)
    }

    /// Exact inverse: reversed, inverted gates, with wires relabeled so the
    /// inverse permutation can stay symbolic.
    pub fn invert(&self) -> Circuit {
        let inv = invert_permutation(&self.output_permutation);
        let gates = self.gates.iter().rev().map(|g| g.inverse().relabeled(|q| inv[q])).collect();
        Circuit { num_qubits: self.num_qubits, gates, output_permutation: inv }
    }

    /// ASAP-layered depth; every gate, opaque or not, occupies one layer.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let l = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.qubits {
                level[q] = l;
            }
            depth = depth.max(l);
        }
        depth
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut counts = GateCounts::default();
        for g in &self.gates {
            match (&g.kind, g.arity()) {
                (GateKind::Opaque { .. }, _) => counts.opaque += 1,
                (_, 1) => counts.single_qubit += 1,
                _ => counts.two_qubit += 1,
            }
            *counts.by_kind.entry(g.kind.name().to_string()).or_default() += 1;
        }
        counts
    }

    pub fn contains_opaque(&self) -> bool {
        self.gates.iter().any(|g| matches!(g.kind, GateKind::Opaque { .. }))
    }

    /// Drops rotations whose angle is below `tol` in magnitude.
    pub fn elide_small_rotations(&mut self, tol: f64) {
        self.gates.retain(|g| g.kind.angle().is_none_or(|a| a.abs() >= tol));
    }

    /// Removes pairs of identical CNOTs with nothing in between on either wire,
    /// repeatedly, until no such pair remains.
    pub fn cancel_adjacent_cnots(&mut self) {
        let mut kept: Vec<Option<Gate>> = Vec::with_capacity(self.gates.len());
        let mut last_on: Vec<Vec<usize>> = vec![Vec::new(); self.num_qubits];
        for g in self.gates.drain(..) {
            if g.kind == GateKind::Cnot {
                let (c, t) = (g.qubits[0], g.qubits[1]);
                if let (Some(&i), Some(&j)) = (last_on[c].last(), last_on[t].last()) {
                    if i == j && kept[i].as_ref() == Some(&g) {
                        kept[i] = None;
                        last_on[c].pop();
                        last_on[t].pop();
                        continue;
                    }
                }
            }
            let idx = kept.len();
            for &q in &g.qubits {
                last_on[q].push(idx);
            }
            kept.push(Some(g));
        }
        self.gates = kept.into_iter().flatten().collect();
    }

    /// Replaces each opaque gate with its `synthesize` output (which must be
    /// permutation-free up to its own output map) on the same wires.
    pub fn map_opaque<F>(&self, mut synthesize: F) -> Result<Circuit>
    where
        F: FnMut(&CMatrix) -> Result<Circuit>,
    {
        let mut out = Circuit::new(self.num_qubits);
        for g in &self.gates {
            match &g.kind {
                GateKind::Opaque { matrix, .. } => {
                    let sub = synthesize(matrix)?;
                    if !sub.has_identity_permutation() {
                        return Err(FslError::InvalidArgument("synthesized block permutes wires".into()));
                    }
                    for sg in &sub.gates {
                        out.push(sg.relabeled(|q| g.qubits[q]));
                    }
                }
                _ => out.push(g.clone()),
            }
        }
        out.output_permutation = self.output_permutation.clone();
        Ok(out)
    }

    /// SWAP network (on wires) that moves logical qubit `i` onto wire `i`.
    pub fn permutation_swaps(&self) -> Vec<(usize, usize)> {
        let mut content = vec![0usize; self.num_qubits];
        for (logical, &w) in self.output_permutation.iter().enumerate() {
            content[w] = logical;
        }
        let mut swaps = Vec::new();
        for i in 0..self.num_qubits {
            if content[i] != i {
                let w = (i + 1..self.num_qubits).find(|&w| content[w] == i).expect("valid permutation");
                swaps.push((i, w));
                content.swap(i, w);
            }
        }
        swaps
    }

    /// Equivalent circuit with the permutation materialized as SWAP gates.
    pub fn with_explicit_swaps(&self) -> Circuit {
        let mut out = Circuit { num_qubits: self.num_qubits, gates: self.gates.clone(), output_permutation: (0..self.num_qubits).collect() };
        for (a, b) in self.permutation_swaps() {
            out.gates.push(Gate::swap(a, b));
        }
        out
    }

    pub fn export_qasm(&self) -> Result<String> {
        if self.contains_opaque() {
            return Err(FslError::OpaqueGatePresent);
        }
        let flat = self.with_explicit_swaps();
        let mut s = String::new();
        s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(s, "qreg q[{}];", self.num_qubits);
        for g in &flat.gates {
            let q = &g.qubits;
            let _ = match g.kind {
                GateKind::H => writeln!(s, "h q[{}];", q[0]),
                GateKind::X => writeln!(s, "x q[{}];", q[0]),
                GateKind::Ry(a) => writeln!(s, "ry({}) q[{}];", fmt_angle(a), q[0]),
                GateKind::Rz(a) => writeln!(s, "rz({}) q[{}];", fmt_angle(a), q[0]),
                GateKind::Phase(a) => writeln!(s, "u1({}) q[{}];", fmt_angle(a), q[0]),
                GateKind::Cnot => writeln!(s, "cx q[{}],q[{}];", q[0], q[1]),
                GateKind::CPhase(a) => writeln!(s, "cp({}) q[{}],q[{}];", fmt_angle(a), q[0], q[1]),
                GateKind::Swap => writeln!(s, "swap q[{}],q[{}];", q[0], q[1]),
                GateKind::Opaque { .. } => unreachable!("checked above"),
            };
        }
        Ok(s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CircuitJson::from(self)).expect("circuit serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&CircuitJson::from(self)).expect("circuit serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Circuit> {
        let raw: CircuitJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_angle(a: f64) -> String {
    format!("{a:.16e}")
}

pub fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

pub fn invert_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: String,
    qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<String>,
    /// Row-major `[re, im]` pairs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    num_qubits: usize,
    gates: Vec<GateJson>,
    output_permutation: Vec<usize>,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| {
                let (label, matrix) = match &g.kind {
                    GateKind::Opaque { label, matrix } => {
                        let rows = (0..matrix.nrows())
                            .map(|r| (0..matrix.ncols()).map(|col| [matrix[(r, col)].re, matrix[(r, col)].im]).collect())
                            .collect();
                        (Some(label.clone()), Some(rows))
                    }
                    _ => (None, None),
                };
                GateJson { kind: g.kind.name().to_string(), qubits: g.qubits.clone(), angle: g.kind.angle(), label, matrix }
            })
            .collect();
        CircuitJson { num_qubits: c.num_qubits, gates, output_permutation: c.output_permutation.clone() }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = FslError;

    fn try_from(raw: CircuitJson) -> Result<Circuit> {
        let mut gates = Vec::with_capacity(raw.gates.len());
        for g in raw.gates {
            let angle = || g.angle.ok_or_else(|| FslError::Parse(format!("{} gate needs an angle", g.kind)));
            let kind = match g.kind.as_str() {
                "H" => GateKind::H,
                "X" => GateKind::X,
                "RY" => GateKind::Ry(angle()?),
                "RZ" => GateKind::Rz(angle()?),
                "PHASE" => GateKind::Phase(angle()?),
                "CNOT" => GateKind::Cnot,
                "CPHASE" => GateKind::CPhase(angle()?),
                "SWAP" => GateKind::Swap,
                "OPAQUE_UNITARY" => {
                    let rows = g.matrix.as_ref().ok_or_else(|| FslError::Parse("opaque gate needs a matrix".into()))?;
                    let dim = rows.len();
                    if rows.iter().any(|r| r.len() != dim) {
                        return Err(FslError::Parse("opaque matrix is not square".into()));
                    }
                    let matrix = CMatrix::from_fn(dim, dim, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1]));
                    GateKind::Opaque { label: g.label.clone().unwrap_or_else(|| "U".into()), matrix }
                }
                other => return Err(FslError::Parse(format!("unknown gate kind '{other}'"))),
            };
            gates.push(Gate { kind, qubits: g.qubits });
        }
        Circuit::from_parts(raw.num_qubits, gates, raw.output_permutation)
    }
}
