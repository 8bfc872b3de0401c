//! Builtin target functions, user expressions and grid sampling.

pub mod expr;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FslError, Result};
use crate::fourier::GridFunction;

pub use expr::Expr;

/// Names accepted by [`builtin`].
pub const CATALOG: &[&str] = &[
    "constant",
    "xpowx",
    "sinc",
    "sinc2d",
    "sinc2d_separable",
    "put",
    "qho",
    "tanh",
    "piecewise",
    "bimodal_gaussian",
    "lognormal",
    "lorentzian",
    "spiky",
    "gaussian2d",
];

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Constant,
    XPowX,
    Sinc,
    Sinc2d,
    Sinc2dSeparable,
    Put,
    Qho,
    Tanh,
    Piecewise,
    Bimodal,
    LogNormal,
    Lorentzian,
    Spiky,
    Gaussian2d,
    Expression(Expr),
}

/// A closed-form target on `[0,1)^dims` with named real parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub dims: usize,
    pub params: BTreeMap<String, f64>,
    /// Sample `√f` instead of `f`, so measured probabilities follow `f`.
    pub sqrt_mode: bool,
    /// The function is not periodic on `[0,1)` and loads best through its mirror extension.
    pub prefers_mirror: bool,
    shape: Shape,
}

fn defaults(shape: &Shape) -> &'static [(&'static str, f64)] {
    match shape {
        Shape::Sinc => &[("a", 21.0)],
        Shape::Sinc2d | Shape::Sinc2dSeparable => &[("a", 6.0)],
        Shape::Put => &[("strike", 0.3)],
        Shape::Qho => &[("sigma", 0.1)],
        Shape::Tanh => &[("b", 5.0), ("c", 1.0)],
        Shape::Bimodal => &[("lambda", 0.3), ("sigma", 0.1)],
        Shape::LogNormal => &[("q", 0.2), ("sigma", 0.5)],
        Shape::Lorentzian => &[("sigma", 0.1)],
        Shape::Spiky => &[("lambda", 2.5)],
        Shape::Gaussian2d => &[
            ("mu1", 0.65),
            ("mu2", 0.35),
            ("sigma11", 0.141_421_356_237_309_5),
            ("sigma12", 0.158_113_883_008_418_97),
            ("sigma21", 0.182_574_185_835_055_37),
            ("sigma22", 0.141_421_356_237_309_5),
            ("lambda", 0.5),
        ],
        _ => &[],
    }
}

/// Looks up a catalog entry and applies `overrides` on top of its defaults.
pub fn builtin(name: &str, overrides: &BTreeMap<String, f64>) -> Result<FunctionDef> {
    let (shape, dims) = match name {
        "constant" => (Shape::Constant, 1),
        "xpowx" => (Shape::XPowX, 1),
        "sinc" => (Shape::Sinc, 1),
        "sinc2d" => (Shape::Sinc2d, 2),
        "sinc2d_separable" => (Shape::Sinc2dSeparable, 2),
        "put" => (Shape::Put, 1),
        "qho" => (Shape::Qho, 1),
        "tanh" => (Shape::Tanh, 1),
        "piecewise" => (Shape::Piecewise, 1),
        "bimodal_gaussian" => (Shape::Bimodal, 1),
        "lognormal" => (Shape::LogNormal, 1),
        "lorentzian" => (Shape::Lorentzian, 1),
        "spiky" => (Shape::Spiky, 1),
        "gaussian2d" => (Shape::Gaussian2d, 2),
        other => return Err(FslError::UnknownFunction(other.to_string())),
    };
    let mut params: BTreeMap<String, f64> = defaults(&shape).iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for (k, v) in overrides {
        match params.get_mut(k) {
            Some(slot) if v.is_finite() => *slot = *v,
            Some(_) => return Err(FslError::InvalidArgument(format!("parameter {k} must be finite"))),
            None => return Err(FslError::InvalidArgument(format!("{name} has no parameter '{k}'"))),
        }
    }
    let prefers_mirror = matches!(shape, Shape::Tanh | Shape::Bimodal);
    Ok(FunctionDef { name: name.to_string(), dims, params, sqrt_mode: false, prefers_mirror, shape })
}

impl FunctionDef {
    /// Wraps a parsed expression; `dims` must cover every variable it uses.
    pub fn from_expr(src: &str, dims: usize) -> Result<FunctionDef> {
        let e = Expr::parse(src)?;
        if !(1..=2).contains(&dims) || e.min_dims() > dims {
            return Err(FslError::InvalidArgument(format!("expression needs {} dims, got {dims}", e.min_dims())));
        }
        Ok(FunctionDef {
            name: src.to_string(),
            dims,
            params: BTreeMap::new(),
            sqrt_mode: false,
            prefers_mirror: false,
            shape: Shape::Expression(e),
        })
    }

    pub fn with_sqrt_mode(mut self, on: bool) -> Self {
        self.sqrt_mode = on;
        self
    }

    fn p(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// Evaluates `f` at a point of `[0,1)^dims`, before any square root.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let re = Complex64::from;
        let gauss = |t: f64, mu: f64, s: f64| (-(t - mu).powi(2) / (2.0 * s * s)).exp();
        match &self.shape {
            Shape::Constant => re(1.0),
            // 0^0 = 1 by continuity.
            Shape::XPowX => re(if x[0] == 0.0 { 1.0 } else { x[0].powf(x[0]) }),
            Shape::Sinc => re(sinc(self.p("a") * PI * (x[0] - 0.5))),
            Shape::Sinc2d => {
                let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
                re(sinc(self.p("a") * PI * r))
            }
            Shape::Sinc2dSeparable => {
                let a = self.p("a") * PI;
                re(sinc(a * (x[0] - 0.5)) * sinc(a * (x[1] - 0.5)))
            }
            Shape::Put => {
                let t = if x[0] <= 0.5 { x[0] } else { 1.0 - x[0] };
                re((self.p("strike") - t).max(0.0))
            }
            Shape::Qho => re((x[0] - 0.5) * gauss(x[0], 0.5, self.p("sigma"))),
            Shape::Tanh => re((self.p("b") * (x[0] - 0.5)).tanh() + self.p("c")),
            Shape::Piecewise => re(match x[0] {
                t if t < 0.3 => 1.0,
                t if t < 0.7 => 0.2 + 1.5 * (t - 0.3),
                _ => 0.4,
            }),
            Shape::Bimodal => {
                let (l, s) = (self.p("lambda"), self.p("sigma"));
                re((1.0 - l) * gauss(x[0], 0.25, s) + l * gauss(x[0], 0.75, s))
            }
            Shape::LogNormal => {
                if x[0] <= 0.0 {
                    return re(0.0);
                }
                let s = self.p("sigma");
                re((-(x[0] / self.p("q")).ln().powi(2) / (2.0 * s * s)).exp() / x[0])
            }
            Shape::Lorentzian => re(1.0 / (1.0 + (x[0] - 0.5).powi(2) / self.p("sigma").powi(2))),
            Shape::Spiky => re(((4.0 * PI * x[0]).cos() + self.p("lambda") * (20.0 * PI * x[0]).cos()).powi(2)),
            Shape::Gaussian2d => {
                let (m1, m2) = (self.p("mu1"), self.p("mu2"));
                let bump = |mu: f64, sx: f64, sy: f64| (-(x[0] - mu).powi(2) / (sx * sx) - (x[1] - mu).powi(2) / (sy * sy)).exp();
                re(bump(m1, self.p("sigma11"), self.p("sigma12")) + self.p("lambda") * bump(m2, self.p("sigma21"), self.p("sigma22")))
            }
            Shape::Expression(e) => e.eval(x),
        }
    }
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t.sin() / t
    }
}

/// Evaluates `def` at every point `k/2^n` and normalizes.
///
/// In sqrt mode values in `[−1e-12, 0)` are clamped to zero; anything more
/// negative, or complex, is rejected.
pub fn sample(def: &FunctionDef, n: usize) -> Result<GridFunction> {
    if n == 0 || def.dims * n >= usize::BITS as usize - 1 {
        return Err(FslError::InvalidArgument(format!("cannot sample {} dims at n={n}", def.dims)));
    }
    let side = 1usize << n;
    let len = 1usize << (def.dims * n);
    let mut point = vec![0.0; def.dims];
    let mut samples = Vec::with_capacity(len);
    for index in 0..len {
        for (d, x) in point.iter_mut().enumerate() {
            let digit = (index >> ((def.dims - 1 - d) * n)) & (side - 1);
            *x = digit as f64 / side as f64;
        }
        let v = def.eval(&point);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(FslError::InvalidArgument(format!("{} is not finite at {point:?}", def.name)));
        }
        if def.sqrt_mode {
            if v.im.abs() > 1e-12 || v.re < -1e-12 {
                return Err(FslError::NegativeUnderSqrt { index, value: v.re });
            }
            samples.push(Complex64::from(v.re.max(0.0).sqrt()));
        } else {
            samples.push(v);
        }
    }
    GridFunction::new(def.dims, n, samples)
}
