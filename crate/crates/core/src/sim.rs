//! Dense statevector simulation, fidelities and seeded sampling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{FslError, Result};

pub const DEFAULT_MAX_QUBITS: usize = 24;
pub const MAX_OPAQUE_QUBITS: usize = 12;
pub const CAPACITY_ENV: &str = "FSL_MAX_QUBITS";

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitudes in big-endian order: qubit 0 is the most significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Statevector { num_qubits, amps }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Statevector { num_qubits, amps }
    }

    /// Requires a power-of-two length and unit norm within `1e-9`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let sv = Self::from_amplitudes_unchecked(amps)?;
        let n2 = sv.norm_sqr();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(FslError::NonUnitNorm(n2));
        }
        Ok(sv)
    }

    /// Scales to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut sv = Self::from_amplitudes_unchecked(amps)?;
        let n = sv.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(FslError::NonUnitNorm(n * n));
        }
        sv.amps.iter_mut().for_each(|a| *a /= n);
        Ok(sv)
    }

    fn from_amplitudes_unchecked(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(FslError::NonPowerOfTwoLength(amps.len()));
        }
        Ok(Statevector { num_qubits: amps.len().trailing_zeros() as usize, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(FslError::DimensionMismatch { expected: self.num_qubits, found: other.num_qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Probability of `qubit` reading `value`, and the normalized state of the
    /// remaining qubits given that outcome (`None` if the probability is 0).
    pub fn project_qubit(&self, qubit: usize, value: bool) -> (f64, Option<Statevector>) {
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        let low = bit - 1;
        let rest: Vec<Complex64> = (0..self.amps.len() / 2)
            .map(|r| {
                let idx = ((r & !low) << 1) | (r & low) | if value { bit } else { 0 };
                self.amps[idx]
            })
            .collect();
        let p: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        if p == 0.0 {
            return (0.0, None);
        }
        let s = p.sqrt();
        let amps = rest.into_iter().map(|a| a / s).collect();
        (p, Some(Statevector { num_qubits: self.num_qubits - 1, amps }))
    }

    /// Reduced 2×2 density matrix of one qubit, `[[ρ00, ρ01], [ρ10, ρ11]]`.
    pub fn reduced_density(&self, qubit: usize) -> [[Complex64; 2]; 2] {
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        let mut rho = [[ZERO; 2]; 2];
        for (i, &a0) in self.amps.iter().enumerate() {
            if i & bit != 0 {
                continue;
            }
            let a1 = self.amps[i | bit];
            rho[0][0] += a0 * a0.conj();
            rho[0][1] += a0 * a1.conj();
            rho[1][0] += a1 * a0.conj();
            rho[1][1] += a1 * a1.conj();
        }
        rho
    }

    /// Interleaved little-endian `f64` pairs `(re, im)` in index order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(16) {
            return Err(FslError::Parse("statevector dump length is not a multiple of 16".into()));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes_unchecked(amps)
    }
}

/// Trace distance between two single-qubit density matrices.
pub fn trace_distance_2x2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    // Δ is Hermitian and 2×2: eigenvalues are t/2 ± sqrt((d/2)² + |off|²).
    let d00 = a[0][0] - b[0][0];
    let d11 = a[1][1] - b[1][1];
    let off = a[0][1] - b[0][1];
    let tr = (d00 + d11).re;
    let half_gap = (((d00 - d11).re / 2.0).powi(2) + off.norm_sqr()).sqrt();
    let (l1, l2) = (tr / 2.0 + half_gap, tr / 2.0 - half_gap);
    0.5 * (l1.abs() + l2.abs())
}

/// `(Σ √(p_i q_i))²`.
pub fn classical_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(FslError::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    for (name, dist) in [("p", p), ("q", q)] {
        if let Some(x) = dist.iter().find(|x| x.is_nan() || **x < 0.0) {
            return Err(FslError::NotADistribution(format!("{name} has entry {x}")));
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(FslError::NotADistribution(format!("{name} sums to {total}")));
        }
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((bc * bc).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotHistogram {
    pub counts: BTreeMap<usize, u64>,
    pub shots: u64,
}

impl ShotHistogram {
    /// Empirical distribution over `len` outcomes.
    pub fn distribution(&self, len: usize) -> Vec<f64> {
        let mut d = vec![0.0; len];
        for (&k, &c) in &self.counts {
            d[k] = c as f64 / self.shots as f64;
        }
        d
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,count\n");
        for (k, c) in &self.counts {
            let _ = writeln!(s, "{k},{c}");
        }
        s
    }
}

/// i.i.d. draws from `|a_i|²` with ChaCha8 seeded by `seed`: one uniform `f64`
/// per shot, located in the cumulative distribution by binary search.
pub fn sample(state: &Statevector, shots: u64, seed: u64) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(FslError::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let last_nonzero = state.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Ok(ShotHistogram { counts, shots })
}

#[derive(Clone, Copy, Debug)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    /// Capacity from `FSL_MAX_QUBITS` if set and valid, else 24.
    fn default() -> Self {
        let max_qubits = std::env::var(CAPACITY_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_QUBITS);
        Simulator { max_qubits }
    }
}

impl Simulator {
    pub fn new(max_qubits: usize) -> Self {
        Simulator { max_qubits }
    }

    pub fn check_capacity(&self, num_qubits: usize) -> Result<()> {
        if num_qubits > self.max_qubits {
            Err(FslError::CapacityExceeded { requested: num_qubits, capacity: self.max_qubits })
        } else {
            Ok(())
        }
    }

    pub fn run_from_zero(&self, c: &Circuit) -> Result<Statevector> {
        self.check_capacity(c.num_qubits())?;
        self.run(c, Statevector::zero(c.num_qubits()))
    }

    /// Applies every gate, then relabels indices by the output permutation.
    pub fn run(&self, c: &Circuit, initial: Statevector) -> Result<Statevector> {
        if initial.num_qubits != c.num_qubits() {
            return Err(FslError::DimensionMismatch { expected: c.num_qubits(), found: initial.num_qubits });
        }
        self.check_capacity(c.num_qubits())?;
        let n = c.num_qubits();
        let mut amps = initial.amps;
        // Amplitudes are nonzero only on submasks of `live`; gates skip the rest.
        let mut live = amps
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .fold(0usize, |m, (i, _)| m | i);
        for g in c.gates() {
            apply_gate(&mut amps, n, g, &mut live)?;
        }
        let perm = c.output_permutation();
        if !c.has_identity_permutation() {
            amps = relabel(&amps, n, perm);
        }
        Ok(Statevector { num_qubits: n, amps })
    }
}

fn bit_of(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// Calls `f` on every submask of `mask`, in increasing order.
#[inline]
fn for_each_submask(mask: usize, mut f: impl FnMut(usize)) {
    let mut sub = 0usize;
    loop {
        f(sub);
        if sub == mask {
            break;
        }
        sub = sub.wrapping_sub(mask) & mask;
    }
}

fn apply_gate(amps: &mut [Complex64], n: usize, g: &Gate, live: &mut usize) -> Result<()> {
    match &g.kind {
        GateKind::Cnot => {
            let (cb, tb) = (bit_of(n, g.qubits[0]), bit_of(n, g.qubits[1]));
            if *live & cb == 0 {
                return Ok(());
            }
            for_each_submask(*live & !(cb | tb), |base| amps.swap(base | cb, base | cb | tb));
            *live |= tb;
        }
        GateKind::Swap => {
            let (ab, bb) = (bit_of(n, g.qubits[0]), bit_of(n, g.qubits[1]));
            if *live & (ab | bb) == 0 {
                return Ok(());
            }
            for_each_submask(*live & !(ab | bb), |base| amps.swap(base | ab, base | bb));
            *live |= ab | bb;
        }
        GateKind::X => {
            let b = bit_of(n, g.qubits[0]);
            for_each_submask(*live & !b, |base| amps.swap(base, base | b));
            *live |= b;
        }
        GateKind::Rz(t) => {
            let b = bit_of(n, g.qubits[0]);
            let (p0, p1) = (Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0));
            for_each_submask(*live, |i| amps[i] *= if i & b == 0 { p0 } else { p1 });
        }
        GateKind::Phase(t) => {
            let b = bit_of(n, g.qubits[0]);
            if *live & b == 0 {
                return Ok(());
            }
            let p = Complex64::from_polar(1.0, *t);
            for_each_submask(*live & !b, |base| amps[base | b] *= p);
        }
        GateKind::CPhase(t) => {
            let both = bit_of(n, g.qubits[0]) | bit_of(n, g.qubits[1]);
            if *live & both != both {
                return Ok(());
            }
            let p = Complex64::from_polar(1.0, *t);
            for_each_submask(*live & !both, |base| amps[base | both] *= p);
        }
        GateKind::H | GateKind::Ry(_) => {
            let b = bit_of(n, g.qubits[0]);
            let m = g.matrix();
            let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            for_each_submask(*live & !b, |base| {
                let (a0, a1) = (amps[base], amps[base | b]);
                amps[base] = m00 * a0 + m01 * a1;
                amps[base | b] = m10 * a0 + m11 * a1;
            });
            *live |= b;
        }
        GateKind::Opaque { matrix, .. } => {
            let k = g.qubits.len();
            if k > MAX_OPAQUE_QUBITS {
                return Err(FslError::CapacityExceeded { requested: k, capacity: MAX_OPAQUE_QUBITS });
            }
            let bits: Vec<usize> = g.qubits.iter().map(|&q| bit_of(n, q)).collect();
            let gmask = bits.iter().fold(0, |m, b| m | b);
            let dim = 1usize << k;
            let offsets: Vec<usize> = (0..dim)
                .map(|j| (0..k).filter(|&t| j & (1 << (k - 1 - t)) != 0).fold(0, |m, t| m | bits[t]))
                .collect();
            let mut buf = vec![ZERO; dim];
            for_each_submask(*live & !gmask, |base| {
                for (j, &off) in offsets.iter().enumerate() {
                    buf[j] = amps[base | off];
                }
                for (r, &off) in offsets.iter().enumerate() {
                    amps[base | off] = (0..dim).map(|c| matrix[(r, c)] * buf[c]).sum();
                }
            });
            *live |= gmask;
        }
    }
    Ok(())
}

/// New index bit for logical qubit `i` is the old bit on wire `perm[i]`.
fn relabel(amps: &[Complex64], n: usize, perm: &[usize]) -> Vec<Complex64> {
    let mut out = vec![ZERO; amps.len()];
    for (old, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let new = (0..n).fold(0usize, |acc, i| {
            if old & bit_of(n, perm[i]) != 0 {
                acc | bit_of(n, i)
            } else {
                acc
            }
        });
        out[new] = a;
    }
    out
}
