//! Grid sampling, discrete Fourier coefficients, truncation windows, the
//! Lanczos filter, mirror extension and truncation-error analysis.
//!
//! Coefficients follow `c_k = N^{-1/2} Σ_ℓ f_ℓ e^{+2πikℓ/N}` per dimension, so
//! that `f_ℓ = N^{-1/2} Σ_k c_k e^{-2πikℓ/N}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{FslError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex samples on a `2^n`-per-dimension grid, row-major with dimension 0
/// slowest, normalized to unit 2-norm.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dims: usize,
    n: usize,
    samples: Vec<Complex64>,
}

fn grid_len(dims: usize, n: usize) -> Result<usize> {
    if dims == 0 || n == 0 {
        return Err(FslError::InvalidArgument("dims and n must be positive".into()));
    }
    let bits = dims * n;
    if bits >= usize::BITS as usize - 1 {
        return Err(FslError::InvalidArgument(format!("grid of 2^{bits} points is too large")));
    }
    Ok(1usize << bits)
}

impl GridFunction {
    /// Normalizes `samples`; errors on length mismatch or an all-zero input.
    pub fn new(dims: usize, n: usize, samples: Vec<Complex64>) -> Result<Self> {
        let mut g = Self::from_raw(dims, n, samples)?;
        let norm = g.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(FslError::NonUnitNorm(norm * norm));
        }
        g.samples.iter_mut().for_each(|s| *s /= norm);
        Ok(g)
    }

    /// Keeps `samples` as given; only the length is checked.
    pub fn from_raw(dims: usize, n: usize, samples: Vec<Complex64>) -> Result<Self> {
        let len = grid_len(dims, n)?;
        if samples.len() != len {
            return Err(FslError::DimensionMismatch { expected: len, found: samples.len() });
        }
        Ok(GridFunction { dims, n, samples })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    fn ensure_unit_norm(&self) -> Result<()> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > 1e-9 {
            Err(FslError::NonUnitNorm(n2))
        } else {
            Ok(())
        }
    }
}

/// Full coefficient tensor in FFT order: along each axis, position `j` holds
/// frequency `j` for `j ≤ N/2` and `j − N` otherwise. The Nyquist entry is
/// reported as `+N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    dims: usize,
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// Wraps a coefficient tensor already in FFT order.
    pub fn from_coeffs(dims: usize, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let len = grid_len(dims, n)?;
        if coeffs.len() != len {
            return Err(FslError::DimensionMismatch { expected: len, found: coeffs.len() });
        }
        Ok(Spectrum { dims, n, coeffs })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed frequency `k` (one entry per dimension, reduced mod `2^n`).
    pub fn get(&self, k: &[i64]) -> Complex64 {
        let side = 1i64 << self.n;
        let idx = k.iter().fold(0usize, |acc, &kd| acc * side as usize + kd.rem_euclid(side) as usize);
        self.coeffs[idx]
    }

    /// Signed frequency of FFT position `j`.
    pub fn frequency(&self, j: usize) -> i64 {
        let side = 1usize << self.n;
        if j <= side / 2 {
            j as i64
        } else {
            j as i64 - side as i64
        }
    }

    /// Whether every axis of flat index `idx` lies in the window `|k| ≤ 2^m − 1`.
    fn in_window(&self, idx: usize, m: usize) -> bool {
        let side = 1usize << self.n;
        let bound = (1i64 << m) - 1;
        let mut rest = idx;
        for _ in 0..self.dims {
            let j = rest % side;
            rest /= side;
            if self.frequency(j).abs() > bound {
                return false;
            }
        }
        true
    }
}

/// Applies a unitary 1D FFT along every axis of a row-major `side^dims` tensor.
fn fft_all_axes(data: &mut [Complex64], dims: usize, n: usize, direction: FftDirection) {
    let side = 1usize << n;
    let fft = FftPlanner::new().plan_fft(side, direction);
    let scale = 1.0 / (side as f64).sqrt();
    let mut line = vec![ZERO; side];
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    for axis in 0..dims {
        let stride = side.pow((dims - 1 - axis) as u32);
        let outer = data.len() / (side * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * side * stride + inner;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + t * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = v * scale;
                }
            }
        }
    }
}

pub fn dft_coefficients(g: &GridFunction) -> Result<Spectrum> {
    g.ensure_unit_norm()?;
    let mut coeffs = g.samples.clone();
    // rustfft's inverse direction carries the e^{+2πi kℓ/N} kernel.
    fft_all_axes(&mut coeffs, g.dims, g.n, FftDirection::Inverse);
    Ok(Spectrum { dims: g.dims, n: g.n, coeffs })
}

/// Inverse of [`dft_coefficients`], without renormalization.
pub fn reconstruct(spectrum: &Spectrum) -> GridFunction {
    let mut samples = spectrum.coeffs.clone();
    fft_all_axes(&mut samples, spectrum.dims, spectrum.n, FftDirection::Forward);
    GridFunction { dims: spectrum.dims, n: spectrum.n, samples }
}

/// Windowed, renormalized coefficients: the compiler's input.
///
/// `coeffs` has `W = 2^{m+1} − 1` entries per axis, row-major, with frequency
/// `k ∈ [−M, M]` (`M = 2^m − 1`) at position `k + M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpec {
    dims: usize,
    m: usize,
    coeffs: Vec<Complex64>,
    norm_constant: f64,
    tail_mass: f64,
    source_n: Option<usize>,
}

impl FourierSpec {
    /// Builds a spec from window coefficients and normalizes them.
    /// `norm_constant` is 1 since there is no source spectrum.
    pub fn from_coeffs(dims: usize, m: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dims == 0 {
            return Err(FslError::InvalidArgument("dims must be positive".into()));
        }
        let w = window_width(m);
        let len = w.pow(dims as u32);
        if coeffs.len() != len {
            return Err(FslError::DimensionMismatch { expected: len, found: coeffs.len() });
        }
        let mass: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if mass < 1e-300 || !mass.is_finite() {
            return Err(FslError::EmptyWindow);
        }
        let s = mass.sqrt();
        Ok(FourierSpec {
            dims,
            m,
            coeffs: coeffs.into_iter().map(|c| c / s).collect(),
            norm_constant: 1.0,
            tail_mass: 0.0,
            source_n: None,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Spectral mass captured by the window before renormalization.
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// Spectral mass outside the window (summed directly, not as `1 − 𝒩`).
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn source_n(&self) -> Option<usize> {
        self.source_n
    }

    pub fn max_frequency(&self) -> i64 {
        (1i64 << self.m) - 1
    }

    /// Coefficient at signed frequency `k`, zero outside the window.
    pub fn get(&self, k: &[i64]) -> Complex64 {
        let mf = self.max_frequency();
        let w = window_width(self.m);
        if k.len() != self.dims || k.iter().any(|kd| kd.abs() > mf) {
            return ZERO;
        }
        let idx = k.iter().fold(0usize, |acc, &kd| acc * w + (kd + mf) as usize);
        self.coeffs[idx]
    }

    /// The loader's target on `D(m+1)` qubits. Along each axis a frequency `k`
    /// sits at `k` if nonnegative and at `2^{m+1} + k` otherwise; slot `2^m` stays
    /// empty. Axis 0 is the most significant register.
    pub fn coefficient_state(&self) -> Vec<Complex64> {
        let reg = 1usize << (self.m + 1);
        let w = window_width(self.m);
        let mf = self.max_frequency();
        let mut state = vec![ZERO; reg.pow(self.dims as u32)];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            let mut rest = flat;
            let mut slots = vec![0usize; self.dims];
            for d in (0..self.dims).rev() {
                let k = (rest % w) as i64 - mf;
                rest /= w;
                slots[d] = k.rem_euclid(reg as i64) as usize;
            }
            let idx = slots.iter().fold(0usize, |acc, &s| acc * reg + s);
            state[idx] = c;
        }
        state
    }

    /// Multiplies by `∏_d sinc(π k_d / M)^a` and renormalizes.
    pub fn lanczos_filter(&self, a: f64) -> Result<FourierSpec> {
        if a.is_nan() || a <= 0.0 {
            return Err(FslError::InvalidArgument(format!("filter exponent must be positive, got {a}")));
        }
        let mf = self.max_frequency();
        let w = window_width(self.m);
        let sigma = |k: i64| -> f64 {
            if k == 0 || mf == 0 {
                1.0
            } else {
                let x = PI * k as f64 / mf as f64;
                (x.sin() / x).powf(a)
            }
        };
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(flat, &c)| {
                let mut rest = flat;
                let mut factor = 1.0;
                for _ in 0..self.dims {
                    factor *= sigma((rest % w) as i64 - mf);
                    rest /= w;
                }
                c * factor
            })
            .collect();
        let mut out = FourierSpec::from_coeffs(self.dims, self.m, coeffs)?;
        out.norm_constant = self.norm_constant;
        out.tail_mass = self.tail_mass;
        out.source_n = self.source_n;
        Ok(out)
    }
}

pub fn window_width(m: usize) -> usize {
    (1usize << (m + 1)) - 1
}

/// Keeps `|k| ≤ 2^m − 1` per axis and renormalizes, recording the captured mass.
pub fn truncate(spectrum: &Spectrum, m: usize) -> Result<FourierSpec> {
    if m >= spectrum.n {
        return Err(FslError::InvalidArgument(format!("window exponent m={m} must be below n={}", spectrum.n)));
    }
    let w = window_width(m);
    let mf = (1i64 << m) - 1;
    let side = 1i64 << spectrum.n;
    let dims = spectrum.dims;
    let coeffs: Vec<Complex64> = (0..w.pow(dims as u32))
        .map(|flat| {
            let mut rest = flat;
            let mut idx = 0usize;
            let mut scale = 1usize;
            for _ in 0..dims {
                let k = (rest % w) as i64 - mf;
                rest /= w;
                idx += k.rem_euclid(side) as usize * scale;
                scale *= side as usize;
            }
            spectrum.coeffs[idx]
        })
        .collect();
    let norm_constant: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    // Below this the window holds only FFT roundoff of a unit-norm input.
    if norm_constant < 1e-20 {
        return Err(FslError::EmptyWindow);
    }
    let tail_mass = exact_infidelity(spectrum, m);
    let s = norm_constant.sqrt();
    Ok(FourierSpec {
        dims,
        m,
        coeffs: coeffs.into_iter().map(|c| c / s).collect(),
        norm_constant,
        tail_mass,
        source_n: Some(spectrum.n),
    })
}

/// `Σ_{k outside window} |c_k|²`, the infidelity of the truncated series.
pub fn exact_infidelity(spectrum: &Spectrum, m: usize) -> f64 {
    let tail: f64 = spectrum
        .coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| !spectrum.in_window(*i, m))
        .map(|(_, c)| c.norm_sqr())
        .sum();
    tail.clamp(0.0, 1.0)
}

/// Appends the reflection `f_{2N−1−k}` and scales by `1/√2`: a periodic function on `n+1` qubits.
pub fn mirror_extend(g: &GridFunction) -> Result<GridFunction> {
    if g.dims != 1 {
        return Err(FslError::InvalidArgument("mirror extension is one-dimensional".into()));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let samples: Vec<Complex64> = g.samples.iter().chain(g.samples.iter().rev()).map(|v| v * s).collect();
    GridFunction::from_raw(1, g.n + 1, samples)
}

/// Truncation error with its analytic bound (1D).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTail {
    pub exact_infidelity: f64,
    pub analytic_bound: f64,
    pub one_norm_delta: f64,
}

pub fn spectral_tail(g: &GridFunction, m: usize) -> Result<SpectralTail> {
    let spectrum = dft_coefficients(g)?;
    Ok(SpectralTail {
        exact_infidelity: exact_infidelity(&spectrum, m),
        analytic_bound: infidelity_bound(g, m, 0)?,
        one_norm_delta: difference_one_norm(g.samples(), 1),
    })
}

/// `‖Δ^order f‖₁` with periodic forward differences.
pub fn difference_one_norm(samples: &[Complex64], order: usize) -> f64 {
    let mut d = samples.to_vec();
    let len = d.len();
    for _ in 0..order {
        d = (0..len).map(|l| d[(l + 1) % len] - d[l]).collect();
    }
    d.iter().map(|v| v.norm()).sum()
}

/// `∫_{θ0}^{π/2} csc^k θ dθ` for even `k ≥ 2`.
pub fn csc_power_integral(k: usize, theta0: f64) -> f64 {
    assert!(k >= 2 && k.is_multiple_of(2), "even power ≥ 2");
    let cot = theta0.cos() / theta0.sin();
    let csc = 1.0 / theta0.sin();
    let mut acc = cot;
    let mut j = 4;
    while j <= k {
        let jf = j as f64;
        acc = csc.powi(j as i32 - 2) * cot / (jf - 1.0) + (jf - 2.0) / (jf - 1.0) * acc;
        j += 2;
    }
    acc
}

/// Upper bound on the truncation infidelity from the `(p+1)`-th difference.
///
/// Summation by parts gives `|c_k| ≤ ‖Δ^{p+1} f‖₁ / (√N |2 sin(πk/N)|^{p+1})`;
/// the tail sum is then bounded by an integral from `θ0 = π 2^m / 2^n`. For
/// `p = 0` this is `‖Δf‖₁² cot(θ0) / 2π`.
pub fn infidelity_bound(g: &GridFunction, m: usize, p: usize) -> Result<f64> {
    if g.dims != 1 {
        return Err(FslError::InvalidArgument("the analytic bound is one-dimensional".into()));
    }
    if m >= g.n {
        return Err(FslError::InvalidArgument(format!("window exponent m={m} must be below n={}", g.n)));
    }
    if m + 1 == g.n {
        return Err(FslError::DegenerateWindow);
    }
    let norm = difference_one_norm(g.samples(), p + 1);
    let theta0 = PI * (1u64 << m) as f64 / (1u64 << g.n) as f64;
    let k = 2 * p + 2;
    Ok(norm * norm / (2f64.powi(k as i32) * PI) * 2.0 * csc_power_integral(k, theta0))
}

/// Least-squares slope of `−log₂ ε_(m)` against `m`, skipping `ε ≤ 1e-14`.
pub fn decay_slope(g: &GridFunction, ms: impl IntoIterator<Item = usize>) -> Result<f64> {
    let spectrum = dft_coefficients(g)?;
    fit_decay_slope(&spectrum, ms)
}

pub fn fit_decay_slope(spectrum: &Spectrum, ms: impl IntoIterator<Item = usize>) -> Result<f64> {
    let points: Vec<(f64, f64)> = ms
        .into_iter()
        .filter(|&m| m < spectrum.n)
        .map(|m| (m as f64, exact_infidelity(spectrum, m)))
        .filter(|&(_, e)| e > 1e-14)
        .map(|(m, e)| (m, -e.log2()))
        .collect();
    if points.len() < 3 {
        return Err(FslError::InsufficientPoints(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
