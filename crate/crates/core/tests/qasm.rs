//! Exported OpenQASM replayed by a separate interpreter with its own gate
//! matrices; the result must agree with the library simulator.

use std::f64::consts::PI;

use fsl::compile::compile_nd;
use fsl::synth::build_inverse_qft;
use fsl::{Circuit, Complex64, FourierSpec, FslError, FslPlan, Gate, Loader, Simulator, Statevector};

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one_qubit(name: &str, angle: f64) -> Mat2 {
    let (s, co) = (angle / 2.0).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "h" => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        "x" => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        "ry" => [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
        "rz" => [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]],
        "u1" => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, angle)]],
        other => panic!("unexpected gate {other}"),
    }
}

struct Replay {
    q: usize,
    amps: Vec<Complex64>,
}

impl Replay {
    fn bit(&self, i: usize, wire: usize) -> bool {
        (i >> (self.q - 1 - wire)) & 1 == 1
    }

    fn apply1(&mut self, wire: usize, m: Mat2) {
        let mask = 1 << (self.q - 1 - wire);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a, b) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | mask] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn statement(&mut self, line: &str) {
        let line = line.trim().trim_end_matches(';');
        let (head, args) = line.split_once(' ').expect("operands");
        let wires: Vec<usize> = args
            .split(',')
            .map(|a| a.trim().trim_start_matches("q[").trim_end_matches(']').parse().unwrap())
            .collect();
        let (name, angle) = match head.split_once('(') {
            Some((n, rest)) => (n, rest.trim_end_matches(')').parse::<f64>().unwrap()),
            None => (head, 0.0),
        };
        match name {
            "cx" => {
                let old = self.amps.clone();
                for (i, a) in old.iter().enumerate() {
                    let j = if self.bit(i, wires[0]) { i ^ (1 << (self.q - 1 - wires[1])) } else { i };
                    self.amps[j] = *a;
                }
            }
            "cp" => {
                for i in 0..self.amps.len() {
                    if self.bit(i, wires[0]) && self.bit(i, wires[1]) {
                        self.amps[i] *= Complex64::from_polar(1.0, angle);
                    }
                }
            }
            "swap" => {
                let old = self.amps.clone();
                for (i, a) in old.iter().enumerate() {
                    let (ba, bb) = (self.bit(i, wires[0]), self.bit(i, wires[1]));
                    let mut j = i;
                    if ba != bb {
                        j ^= (1 << (self.q - 1 - wires[0])) | (1 << (self.q - 1 - wires[1]));
                    }
                    self.amps[j] = *a;
                }
            }
            _ => self.apply1(wires[0], one_qubit(name, angle)),
        }
    }
}

fn replay(qasm: &str) -> Vec<Complex64> {
    let mut lines = qasm.lines();
    assert_eq!(lines.next(), Some("OPENQASM 2.0;"));
    assert_eq!(lines.next(), Some("include \"qelib1.inc\";"));
    let decl = lines.next().unwrap();
    let q: usize = decl.trim_start_matches("qreg q[").trim_end_matches("];").parse().unwrap();
    let mut r = Replay { q, amps: vec![c(0.0, 0.0); 1 << q] };
    r.amps[0] = c(1.0, 0.0);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        r.statement(line);
    }
    r.amps
}

fn assert_same(c: &Circuit) {
    let qasm = c.export_qasm().unwrap();
    let ours = Simulator::new(16).run_from_zero(c).unwrap();
    let theirs = replay(&qasm);
    for (a, b) in ours.amplitudes().iter().zip(&theirs) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn every_gate_kind_replays() {
    let mut circ = Circuit::new(3);
    circ.push(Gate::h(0));
    circ.push(Gate::x(2));
    circ.push(Gate::ry(1, 0.3));
    circ.push(Gate::rz(2, -1.1));
    circ.push(Gate::phase(0, 0.7));
    circ.push(Gate::cnot(0, 1));
    circ.push(Gate::cphase(1, 2, PI / 3.0));
    circ.push(Gate::swap(0, 2));
    circ.push(Gate::h(1));
    assert_same(&circ);
}

#[test]
fn inverse_qft_permutation_is_materialized() {
    for q in 2..6 {
        let mut circ = Circuit::new(q);
        for w in 0..q {
            circ.push(Gate::ry(w, 0.4 + w as f64));
        }
        circ.append(&build_inverse_qft(q, true), &(0..q).collect::<Vec<_>>());
        assert!(!circ.has_identity_permutation());
        assert_same(&circ);
    }
}

#[test]
fn compiled_circuit_replays() {
    let coeffs: Vec<Complex64> = (0..7).map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64), 0.3 * k as f64)).collect();
    let spec = FourierSpec::from_coeffs(1, 2, coeffs).unwrap();
    let (circ, _) = compile_nd(&spec, &FslPlan::new(1, 6, 2)).unwrap();
    assert_same(&circ);
}

#[test]
fn opaque_blocks_block_export() {
    let coeffs = vec![Complex64::new(1.0, 0.0); 9];
    let spec = FourierSpec::from_coeffs(2, 1, coeffs).unwrap();
    let plan = FslPlan::new(2, 3, 1).with_loader(Loader::Schmidt);
    let (circ, _) = compile_nd(&spec, &plan).unwrap();
    assert!(matches!(circ.export_qasm(), Err(FslError::OpaqueGatePresent)));
    let plan = FslPlan { decompose_opaque: true, ..plan };
    let (flat, _) = compile_nd(&spec, &plan).unwrap();
    assert_same(&flat);
    let want = Simulator::new(8).run_from_zero(&circ).unwrap();
    let got = Statevector::from_amplitudes(replay(&flat.export_qasm().unwrap())).unwrap();
    assert!(got.fidelity(&want).unwrap() > 1.0 - 1e-10);
}

#[test]
fn angles_survive_text_round_trip() {
    let theta = 0.1f64 + 0.2;
    let mut circ = Circuit::new(1);
    circ.push(Gate::rz(0, theta));
    let qasm = circ.export_qasm().unwrap();
    let text = qasm.lines().nth(3).unwrap();
    let parsed: f64 = text.trim_start_matches("rz(").split(')').next().unwrap().parse().unwrap();
    assert_eq!(parsed, theta);
}
