//! Model descriptions: which SPDE, its coefficients, the nonlinear drift `F_n`
//! and the named initial conditions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::grid::{neighbours, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `du = (u_xx − λu) dt + σ dW`
    Heat,
    /// `du = (u_xx − u³) dt + σ dW`
    Langevin,
    /// `du = (ν u_xx − u u_x) dt + σ dW`
    Burgers,
    /// `du = (u_xx + λ (u_x)²) dt + σ dW`
    Kpz,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Heat => "heat",
            ModelKind::Langevin => "langevin",
            ModelKind::Burgers => "burgers",
            ModelKind::Kpz => "kpz",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heat" => Ok(ModelKind::Heat),
            "langevin" => Ok(ModelKind::Langevin),
            "burgers" => Ok(ModelKind::Burgers),
            "kpz" => Ok(ModelKind::Kpz),
            other => Err(Error::InvalidArgument(format!(
                "unknown model `{other}` (expected heat, langevin, burgers or kpz)"
            ))),
        }
    }
}

/// Stencil used for the Burgers/KPZ nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Nonlinearity {
    #[default]
    Central,
    OneSided,
}

impl Nonlinearity {
    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::Central => "central",
            Nonlinearity::OneSided => "one-sided",
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "central" => Ok(Nonlinearity::Central),
            "one-sided" | "onesided" | "one_sided" => Ok(Nonlinearity::OneSided),
            other => Err(Error::InvalidArgument(format!(
                "unknown nonlinearity `{other}` (expected central or one-sided)"
            ))),
        }
    }
}

/// Fourier coefficients of
/// `u₀(x) = c₀/√(2π) + (1/√π) Σ_{k≥1} (c_{−k} cos kx + c_k sin kx)`.
///
/// `cos[k-1]` holds `c_{−k}` and `sin[k-1]` holds `c_k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierCoeffs {
    pub c0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_truncated(x, usize::MAX)
    }

    /// Series value keeping wavenumbers `k ≤ max_k`.
    pub fn eval_truncated(&self, x: f64, max_k: usize) -> f64 {
        let mut acc = self.c0 / (2.0 * PI).sqrt();
        let kmax = self.cos.len().max(self.sin.len()).min(max_k);
        let inv = 1.0 / PI.sqrt();
        for k in 1..=kmax {
            let kx = k as f64 * x;
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            acc += inv * (a * kx.cos() + b * kx.sin());
        }
        acc
    }
}

/// Named initial conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Identically zero.
    Trivial,
    /// `exp(−(x − π)² / (2·0.25))`.
    Bump,
    /// `sin x`.
    Sinusoid,
    /// `Σ_{k ∈ {1,5,10}} cos kx`.
    HighFrequency,
    /// `5 sin 3x`.
    HighEnergy,
    /// Fourier series, truncated at the grid's Nyquist wavenumber.
    Fourier(FourierCoeffs),
}

impl InitialCondition {
    pub const BUMP_VARIANCE: f64 = 0.25;
    pub const HIGH_FREQUENCY_MODES: [usize; 3] = [1, 5, 10];

    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::Trivial => "trivial",
            InitialCondition::Bump => "bump",
            InitialCondition::Sinusoid => "sinusoid",
            InitialCondition::HighFrequency => "high-frequency",
            InitialCondition::HighEnergy => "high-energy",
            InitialCondition::Fourier(_) => "fourier",
        }
    }

    /// Pointwise value of the continuum initial profile.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Trivial => 0.0,
            InitialCondition::Bump => (-(x - PI).powi(2) / (2.0 * Self::BUMP_VARIANCE)).exp(),
            InitialCondition::Sinusoid => x.sin(),
            InitialCondition::HighFrequency => Self::HIGH_FREQUENCY_MODES
                .iter()
                .map(|&k| (k as f64 * x).cos())
                .sum(),
            InitialCondition::HighEnergy => 5.0 * (3.0 * x).sin(),
            InitialCondition::Fourier(c) => c.eval(x),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        match self {
            InitialCondition::Fourier(c) => {
                let nyquist = grid.n() / 2;
                (0..grid.n())
                    .map(|i| c.eval_truncated(grid.x(i), nyquist))
                    .collect()
            }
            other => (0..grid.n()).map(|i| other.value(grid.x(i))).collect(),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trivial" | "zero" => Ok(InitialCondition::Trivial),
            "bump" => Ok(InitialCondition::Bump),
            "sinusoid" | "sin" => Ok(InitialCondition::Sinusoid),
            "high-frequency" | "highfrequency" => Ok(InitialCondition::HighFrequency),
            "high-energy" | "highenergy" => Ok(InitialCondition::HighEnergy),
            other => Err(Error::UnknownInitialCondition(other.to_string())),
        }
    }
}

/// Which SPDE is simulated, with its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Noise amplitude σ.
    pub sigma: f64,
    /// Heat damping or KPZ coupling.
    pub lambda: f64,
    /// Burgers viscosity.
    pub nu: f64,
    /// Ignored for Heat and Langevin.
    pub nonlinearity: Nonlinearity,
    /// Burgers central stencil: multiply by ½ (conservative form of `u u_x`).
    /// Off by default, which keeps the stencil `(v²_{i+1} − v²_{i−1})/(2dx)`.
    pub half_factor: bool,
    pub initial_condition: InitialCondition,
}

impl ModelSpec {
    fn base(kind: ModelKind, initial_condition: InitialCondition) -> Self {
        Self {
            kind,
            sigma: 1.0,
            lambda: 0.0,
            nu: 1.0,
            nonlinearity: Nonlinearity::Central,
            half_factor: false,
            initial_condition,
        }
    }

    pub fn heat(lambda: f64, sigma: f64) -> Self {
        Self {
            lambda,
            sigma,
            ..Self::base(ModelKind::Heat, InitialCondition::Trivial)
        }
    }

    pub fn langevin(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::base(ModelKind::Langevin, InitialCondition::HighEnergy)
        }
    }

    pub fn burgers(nu: f64, sigma: f64, nonlinearity: Nonlinearity) -> Self {
        Self {
            nu,
            sigma,
            nonlinearity,
            ..Self::base(ModelKind::Burgers, InitialCondition::Bump)
        }
    }

    pub fn kpz(lambda: f64, sigma: f64, nonlinearity: Nonlinearity) -> Self {
        Self {
            lambda,
            sigma,
            nonlinearity,
            ..Self::base(ModelKind::Kpz, InitialCondition::Sinusoid)
        }
    }

    pub fn with_initial_condition(mut self, ic: InitialCondition) -> Self {
        self.initial_condition = ic;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if self.kind == ModelKind::Burgers && !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        Ok(())
    }

    /// Whether `F_n` vanishes identically.
    pub fn is_linear(&self) -> bool {
        self.kind == ModelKind::Heat
    }

    /// Map a pure-Laplacian eigenvalue to the eigenvalue of the model's
    /// linear drift operator.
    pub fn linear_eigenvalue(&self, laplacian_eigenvalue: f64) -> f64 {
        match self.kind {
            ModelKind::Heat => laplacian_eigenvalue - self.lambda,
            ModelKind::Burgers => self.nu * laplacian_eigenvalue,
            ModelKind::Langevin | ModelKind::Kpz => laplacian_eigenvalue,
        }
    }

    /// The nonlinear drift `F_n(v)` on the grid.
    pub fn drift_nonlinear(&self, grid: &Grid, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; grid.n()];
        self.drift_nonlinear_into(grid, v, &mut out)?;
        Ok(out)
    }

    pub fn drift_nonlinear_into(&self, grid: &Grid, v: &[f64], out: &mut [f64]) -> Result<()> {
        let n = grid.n();
        check_len(n, v.len())?;
        check_len(n, out.len())?;
        let dx = grid.dx();
        match (self.kind, self.nonlinearity) {
            (ModelKind::Heat, _) => out.fill(0.0),
            (ModelKind::Langevin, _) => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = -x * x * x;
                }
            }
            (ModelKind::Burgers, Nonlinearity::Central) => {
                let scale = if self.half_factor { 0.25 } else { 0.5 } / dx;
                for i in 0..n {
                    let (ip, im) = neighbours(i, n);
                    out[i] = -scale * (v[ip] * v[ip] - v[im] * v[im]);
                }
            }
            (ModelKind::Burgers, Nonlinearity::OneSided) => {
                for i in 0..n {
                    let (ip, _) = neighbours(i, n);
                    out[i] = -(v[ip] - v[i]) * v[i] / dx;
                }
            }
            (ModelKind::Kpz, Nonlinearity::Central) => {
                for i in 0..n {
                    let (ip, im) = neighbours(i, n);
                    let d = (v[ip] - v[im]) / (2.0 * dx);
                    out[i] = self.lambda * d * d;
                }
            }
            (ModelKind::Kpz, Nonlinearity::OneSided) => {
                for i in 0..n {
                    let (ip, _) = neighbours(i, n);
                    let d = (v[ip] - v[i]) / dx;
                    out[i] = self.lambda * d * d;
                }
            }
        }
        Ok(())
    }

    pub fn initial_state(&self, grid: &Grid) -> Vec<f64> {
        self.initial_condition.sample(grid)
    }
}
