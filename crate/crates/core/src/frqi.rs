//! Grayscale image loading in the flexible quantum image representation.
//!
//! A `2^n × 2^n` image becomes a `2n+1`-qubit state: qubit 0 holds the pixel
//! color `cos(πI/2)|0⟩ + sin(πI/2)|1⟩`, then the row register, then the column
//! register. In the `|±i⟩` basis of the color qubit the state splits into the
//! phase functions `g⁺ = e^{−iπI/2}/2^n` and `g⁻ = conj(g⁺)`, each of which is
//! truncated and loaded like any other two-dimensional Fourier series.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::compile::{self, CompileReport, FslPlan};
use crate::error::{FslError, Result};
use crate::fourier::{self, FourierSpec, GridFunction};
use crate::sim::Statevector;

/// Square image with brightness in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    n: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// `pixels` must hold `4^n` values; they are clamped into `[0, 1]`.
    pub fn new(n: usize, pixels: Vec<f64>) -> Result<Self> {
        let side = side_of(n)?;
        if pixels.len() != side * side {
            return Err(FslError::DimensionMismatch { expected: side * side, found: pixels.len() });
        }
        if let Some(bad) = pixels.iter().find(|p| !p.is_finite()) {
            return Err(FslError::InvalidArgument(format!("pixel value {bad} is not finite")));
        }
        Ok(GrayImage { n, pixels: pixels.into_iter().map(|p| p.clamp(0.0, 1.0)).collect() })
    }

    /// Samples `f(row/side, col/side)` on the pixel grid.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let side = side_of(n)?;
        let s = side as f64;
        let pixels = (0..side * side).map(|i| f((i / side) as f64 / s, (i % side) as f64 / s)).collect();
        Self::new(n, pixels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.side() + col]
    }

    /// Binary 8-bit PGM; brightness is `value / maxval`.
    pub fn read_pgm(reader: impl Read) -> Result<Self> {
        let mut r = BufReader::new(reader);
        let magic = pgm_token(&mut r)?;
        if magic != "P5" {
            return Err(FslError::Parse(format!("expected P5 magic, found '{magic}'")));
        }
        let mut header = [0usize; 3];
        for h in header.iter_mut() {
            let tok = pgm_token(&mut r)?;
            *h = tok.parse().map_err(|_| FslError::Parse(format!("bad PGM header field '{tok}'")))?;
        }
        let [width, height, maxval] = header;
        if maxval == 0 || maxval > 255 {
            return Err(FslError::Parse(format!("unsupported PGM maxval {maxval}")));
        }
        if width != height || !width.is_power_of_two() {
            return Err(FslError::InvalidArgument(format!("image must be square with a power-of-two side, got {width}x{height}")));
        }
        let mut raw = vec![0u8; width * height];
        r.read_exact(&mut raw).map_err(|e| FslError::Parse(format!("truncated PGM raster: {e}")))?;
        let n = width.trailing_zeros() as usize;
        Self::new(n, raw.iter().map(|&b| f64::from(b) / maxval as f64).collect())
    }

    pub fn write_pgm(&self, mut writer: impl Write) -> Result<()> {
        let side = self.side();
        write!(writer, "P5\n{side} {side}\n255\n")?;
        let raw: Vec<u8> = self.pixels.iter().map(|p| (p * 255.0).round() as u8).collect();
        writer.write_all(&raw)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_pgm(std::fs::File::open(path)?)
    }
}

fn side_of(n: usize) -> Result<usize> {
    if n == 0 || n > 15 {
        return Err(FslError::InvalidArgument(format!("image exponent n={n} is out of range 1..=15")));
    }
    Ok(1 << n)
}

/// Next whitespace-delimited header token, skipping `#` comments. Consumes
/// exactly one trailing whitespace byte, as the raster starts right after it.
fn pgm_token(r: &mut impl BufRead) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            return if tok.is_empty() { Err(FslError::Parse("unexpected end of PGM header".into())) } else { Ok(tok) };
        }
        match byte[0] {
            b'#' if tok.is_empty() => {
                let mut line = Vec::new();
                r.read_until(b'\n', &mut line)?;
            }
            b if b.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    return Ok(tok);
                }
            }
            b => tok.push(char::from(b)),
        }
    }
}

/// The exact image state on `2n+1` qubits.
pub fn frqi_target(img: &GrayImage) -> Statevector {
    let scale = 1.0 / img.side() as f64;
    let half = img.pixels.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * half];
    for (i, &p) in img.pixels.iter().enumerate() {
        let (s, c) = (FRAC_PI_2 * p).sin_cos();
        amps[i] = Complex64::from(c * scale);
        amps[half + i] = Complex64::from(s * scale);
    }
    Statevector::from_amplitudes(amps).expect("cos² + sin² = 1 per pixel")
}

/// Windowed spectra of the two color phase functions.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpectra {
    /// Truncated spectrum of `g⁺ = e^{−iπI/2}/2^n`.
    pub plus: FourierSpec,
    /// Truncated spectrum of `g⁻ = conj(g⁺)`: `c⁻_k = conj(c⁺_{−k})`.
    pub minus: FourierSpec,
}

impl PhaseSpectra {
    /// `(|0⟩|c̃⁺⟩ + |1⟩|c̃⁻⟩)/√2` over `1 + 2(m+1)` qubits, color qubit first.
    pub fn combined_state(&self) -> Vec<Complex64> {
        self.plus
            .coefficient_state()
            .into_iter()
            .chain(self.minus.coefficient_state())
            .map(|a| a * FRAC_1_SQRT_2)
            .collect()
    }

    /// Spectral mass of `g±` outside the window; both halves lose the same amount.
    pub fn tail_mass(&self) -> f64 {
        self.plus.tail_mass()
    }
}

fn plus_phase(img: &GrayImage) -> Result<GridFunction> {
    let scale = 1.0 / img.side() as f64;
    let samples = img.pixels.iter().map(|&p| Complex64::from_polar(scale, -FRAC_PI_2 * p)).collect();
    GridFunction::from_raw(2, img.n, samples)
}

pub fn phase_spectra(img: &GrayImage, m: usize) -> Result<PhaseSpectra> {
    let spectrum = fourier::dft_coefficients(&plus_phase(img)?)?;
    let plus = fourier::truncate(&spectrum, m)?;
    // Row-major over a symmetric window: negating both frequencies reverses the flat index.
    let minus_coeffs: Vec<Complex64> = plus.coeffs().iter().rev().map(|c| c.conj()).collect();
    let minus = FourierSpec::from_coeffs(2, m, minus_coeffs)?;
    Ok(PhaseSpectra { plus, minus })
}

/// Maps `|0⟩ → |+i⟩`, `|1⟩ → |−i⟩` on the color qubit, turning the phase
/// decomposition back into brightness amplitudes.
fn push_color_basis_change(c: &mut Circuit) {
    c.push_logical(Gate::h(0));
    c.push_logical(Gate::phase(0, FRAC_PI_2));
}

/// Compiles the m-truncated image state; `plan` must be two-dimensional with
/// `plan.n` equal to the image exponent. The circuit has `2n+1` qubits.
pub fn compile_frqi(img: &GrayImage, plan: &FslPlan) -> Result<(Circuit, CompileReport)> {
    if plan.dims != 2 || plan.n != img.n {
        return Err(FslError::DimensionMismatch { expected: 2 * img.n, found: plan.dims * plan.n });
    }
    if plan.filter.is_some() || plan.nonperiodic.is_some() {
        return Err(FslError::InvalidPlan("image loading takes neither a filter nor a mirror extension".into()));
    }
    plan.validate()?;
    let q = 2 * img.n + 1;
    if q > plan.max_qubits {
        return Err(FslError::CapacityExceeded { requested: q, capacity: plan.max_qubits });
    }
    let spectra = phase_spectra(img, plan.m)?;
    let (circuit, report) =
        compile::compile_prefixed(&spectra.combined_state(), 1, plan, spectra.tail_mass(), push_color_basis_change)?;
    Ok((circuit, report))
}

/// The truncated series of both phase functions recombined into brightness
/// amplitudes, computed without any circuit.
pub fn frqi_truncated_target(img: &GrayImage, m: usize) -> Result<Statevector> {
    let spectra = phase_spectra(img, m)?;
    let plus = compile::target_state(&spectra.plus, img.n)?;
    let minus = compile::target_state(&spectra.minus, img.n)?;
    let h = 0.5;
    let dark = plus.amplitudes().iter().zip(minus.amplitudes()).map(|(a, b)| (a + b) * h);
    let bright = plus.amplitudes().iter().zip(minus.amplitudes()).map(|(a, b)| (a - b) * Complex64::new(0.0, h));
    Statevector::normalized(dark.chain(bright).collect())
}

/// Reduced density matrix of the color qubit.
pub fn color_state(state: &Statevector) -> [[Complex64; 2]; 2] {
    state.reduced_density(0)
}
