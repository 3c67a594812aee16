//! The jump-process engine.
//!
//! A state `v ∈ ℝⁿ` jumps by `±h` along one eigenvector `e_i` of the linear
//! drift after an exponential holding time with parameter `J(v) = Σ J_i^±(v)`;
//! the jump `(i, ±)` is chosen with probability `J_i^±/J`.
//!
//! Three rate families are provided (see [`rates`]). The academic and
//! detailed-balance variants jump by `h` in Euclidean coordinates. The fast
//! variant works on L²-normalized coefficients `√dx·⟨v, e_i⟩`, so one jump of
//! size `h` there moves the grid state by `h/√dx`.

pub mod rates;
pub mod sampling;

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::oracles::langevin::LangevinTarget;
use crate::problem::Semidiscretization;
use crate::rng::RngStream;

pub use rates::{RateTable, DEFAULT_EXPONENT_CAP};
pub use sampling::{holding_time, sample_holding, sample_jump, select_jump};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Academic,
    Fast,
    DetailedBalance,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Academic => "academic",
            Variant::Fast => "fast",
            Variant::DetailedBalance => "detailed-balance",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "academic" => Ok(Variant::Academic),
            "fast" => Ok(Variant::Fast),
            "detailed-balance" | "detailed_balance" | "db" => Ok(Variant::DetailedBalance),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant `{other}` (expected academic, fast or detailed-balance)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    pub exponent_cap: f64,
    /// Rebuild the grid state from the spectral cache every this many jumps.
    pub refresh_interval: u64,
    /// Maximum number of events per `simulate` call.
    pub step_budget: u64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            exponent_cap: DEFAULT_EXPONENT_CAP,
            refresh_interval: 1024,
            step_budget: 100_000_000,
        }
    }
}

/// One holding interval followed by a jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub step: u64,
    pub t_before: f64,
    pub holding: f64,
    pub mode: usize,
    pub direction: i8,
}

/// Current state of one replica plus the caches the kernel keeps coherent.
#[derive(Debug, Clone)]
pub struct JumpState {
    pub t: f64,
    /// Grid values.
    pub v: Vec<f64>,
    /// Spectral coefficients of `v` in the kernel's coordinates.
    pub vhat: Vec<f64>,
    /// Spectral coefficients of `F_n(v)` in the kernel's coordinates
    /// (unused by the detailed-balance variant).
    pub fhat: Vec<f64>,
    pub step_count: u64,
    pub(crate) rates: RateTable,
    f_grid: Vec<f64>,
    since_refresh: u64,
}

impl JumpState {
    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Rates at the current state.
    pub fn rates(&self) -> &RateTable {
        &self.rates
    }
}

/// Callbacks fired by [`JumpKernel::simulate`].
pub trait Observer {
    /// The process sits in `state` on `[start, end)`. The last interval is
    /// clipped at the horizon. Returning `Break` stops the simulation.
    fn on_hold(&mut self, _state: &JumpState, _start: f64, _end: f64) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }

    /// A jump is about to be applied to `state`.
    fn on_jump(&mut self, _state: &JumpState, _event: &EventRecord) {}
}

impl Observer for () {}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn on_hold(&mut self, state: &JumpState, start: f64, end: f64) -> ControlFlow<()> {
        (**self).on_hold(state, start, end)
    }

    fn on_jump(&mut self, state: &JumpState, event: &EventRecord) {
        (**self).on_jump(state, event)
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn on_hold(&mut self, state: &JumpState, start: f64, end: f64) -> ControlFlow<()> {
        let a = self.0.on_hold(state, start, end);
        let b = self.1.on_hold(state, start, end);
        if a.is_break() || b.is_break() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }

    fn on_jump(&mut self, state: &JumpState, event: &EventRecord) {
        self.0.on_jump(state, event);
        self.1.on_jump(state, event);
    }
}

/// Records every applied jump.
#[derive(Debug, Default, Clone)]
pub struct EventLog {
    pub events: Vec<EventRecord>,
}

impl Observer for EventLog {
    fn on_jump(&mut self, _state: &JumpState, event: &EventRecord) {
        self.events.push(*event);
    }
}

/// How a `simulate` call ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOutcome {
    pub events: u64,
    pub stopped_early: bool,
}

/// Immutable, shareable description of one jump process.
#[derive(Debug, Clone)]
pub struct JumpKernel {
    problem: Arc<Semidiscretization>,
    variant: Variant,
    h: f64,
    options: KernelOptions,
    target: Option<LangevinTarget>,
    prefactor: f64,
    exponent_scale: f64,
    /// Spectral coordinate = `coeff_scale · ⟨v, e_i⟩`.
    coeff_scale: f64,
}

impl JumpKernel {
    pub fn new(problem: Arc<Semidiscretization>, variant: Variant, h: f64) -> Result<Self> {
        Self::with_options(problem, variant, h, KernelOptions::default())
    }

    pub fn with_options(
        problem: Arc<Semidiscretization>,
        variant: Variant,
        h: f64,
        options: KernelOptions,
    ) -> Result<Self> {
        let target = match variant {
            Variant::DetailedBalance => Some(LangevinTarget::for_problem(&problem)?),
            _ => None,
        };
        Self::assemble(problem, variant, h, options, target)
    }

    /// Detailed-balance kernel for an explicit target (e.g. the scalar surrogate).
    pub fn detailed_balance(target: LangevinTarget, h: f64, options: KernelOptions) -> Result<Self> {
        let model = crate::model::ModelSpec::langevin(target.sigma());
        let problem = Arc::new(Semidiscretization {
            grid: *target.grid(),
            basis: target.basis().clone(),
            model,
        });
        Self::assemble(problem, Variant::DetailedBalance, h, options, Some(target))
    }

    fn assemble(
        problem: Arc<Semidiscretization>,
        variant: Variant,
        h: f64,
        options: KernelOptions,
        target: Option<LangevinTarget>,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "jump size must be positive, got {h}"
            )));
        }
        if !(options.exponent_cap > 0.0) || options.refresh_interval == 0 {
            return Err(Error::InvalidArgument(
                "exponent cap and refresh interval must be positive".into(),
            ));
        }
        let s2 = problem.sigma().powi(2);
        let dx = problem.dx();
        let (prefactor, exponent_scale, coeff_scale) = match variant {
            Variant::Academic => (s2 / (2.0 * h * h * dx), h * dx / s2, 1.0),
            Variant::Fast => (s2 / (2.0 * h * h), h / s2, dx.sqrt()),
            Variant::DetailedBalance => (s2 / (2.0 * h * h * dx), 0.0, 1.0),
        };
        Ok(Self {
            problem,
            variant,
            h,
            options,
            target,
            prefactor,
            exponent_scale,
            coeff_scale,
        })
    }

    pub fn problem(&self) -> &Arc<Semidiscretization> {
        &self.problem
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn options(&self) -> &KernelOptions {
        &self.options
    }

    pub fn target(&self) -> Option<&LangevinTarget> {
        self.target.as_ref()
    }

    pub fn n(&self) -> usize {
        self.problem.n()
    }

    /// Factor between spectral coordinates and Euclidean coefficients.
    pub fn coeff_scale(&self) -> f64 {
        self.coeff_scale
    }

    /// Grid-space length of one jump.
    pub fn physical_jump(&self) -> f64 {
        self.h / self.coeff_scale
    }

    /// Mean holding time `1/J(0)` at the zero state, `h²dx/(nσ²)` for the
    /// Euclidean variants and `h²/(nσ²)` for the fast one.
    pub fn zero_state_mean_holding(&self) -> f64 {
        1.0 / (2.0 * self.n() as f64 * self.prefactor)
    }

    pub fn init_state(&self, v0: Vec<f64>, t0: f64) -> Result<JumpState> {
        let n = self.n();
        check_len(n, v0.len())?;
        let mut state = JumpState {
            t: t0,
            vhat: vec![0.0; n],
            fhat: vec![0.0; n],
            v: v0,
            step_count: 0,
            rates: RateTable::zeros(n),
            f_grid: vec![0.0; n],
            since_refresh: 0,
        };
        self.problem.basis.project_into(&state.v, &mut state.vhat)?;
        if self.coeff_scale != 1.0 {
            for c in &mut state.vhat {
                *c *= self.coeff_scale;
            }
        }
        self.refresh_nonlinear(&mut state)?;
        self.fill_rates(&mut state)?;
        Ok(state)
    }

    pub fn initial_state(&self) -> Result<JumpState> {
        self.init_state(self.problem.initial_state(), 0.0)
    }

    fn refresh_nonlinear(&self, state: &mut JumpState) -> Result<()> {
        if self.problem.model.is_linear() || self.variant == Variant::DetailedBalance {
            return Ok(());
        }
        let p = &*self.problem;
        p.model.drift_nonlinear_into(&p.grid, &state.v, &mut state.f_grid)?;
        p.basis.project_into(&state.f_grid, &mut state.fhat)?;
        if self.coeff_scale != 1.0 {
            for c in &mut state.fhat {
                *c *= self.coeff_scale;
            }
        }
        Ok(())
    }

    fn fill_rates(&self, state: &mut JumpState) -> Result<()> {
        let cap = self.options.exponent_cap;
        match &self.target {
            Some(target) => rates::fill_detailed_balance_rates(
                &mut state.rates,
                target,
                &state.v,
                &state.vhat,
                self.h,
                self.prefactor,
                cap,
            ),
            None => rates::fill_drift_rates(
                &mut state.rates,
                self.problem.basis.eigenvalues(),
                &state.vhat,
                &state.fhat,
                self.prefactor,
                self.exponent_scale,
                cap,
            ),
        }
    }

    /// Recompute the rate table of `state` from scratch.
    pub fn rates(&self, state: &JumpState) -> Result<RateTable> {
        let mut s = state.clone();
        self.fill_rates(&mut s)?;
        Ok(s.rates)
    }

    /// Move `state` by `direction·h` along `mode` and bring every cache up to date.
    pub fn apply_jump(&self, state: &mut JumpState, mode: usize, direction: i8) -> Result<()> {
        let n = self.n();
        if mode >= n {
            return Err(Error::InvalidArgument(format!(
                "mode {mode} out of range for n = {n}"
            )));
        }
        let s = f64::from(direction.signum());
        state.vhat[mode] += s * self.h;
        let dv = s * self.physical_jump();
        for (x, e) in state.v.iter_mut().zip(self.problem.basis.vector(mode)) {
            *x += dv * e;
        }
        state.step_count += 1;
        state.since_refresh += 1;
        if state.since_refresh >= self.options.refresh_interval {
            self.resync(state)?;
        }
        if self.problem.model.is_linear() && self.variant != Variant::DetailedBalance {
            let eig = self.problem.basis.eigenvalue(mode);
            rates::set_drift_mode(
                &mut state.rates,
                mode,
                eig * state.vhat[mode],
                self.prefactor,
                self.exponent_scale,
                self.options.exponent_cap,
            )?;
            if state.since_refresh == 0 {
                self.fill_rates(state)
            } else {
                state.rates.resum()
            }
        } else {
            self.refresh_nonlinear(state)?;
            self.fill_rates(state)
        }
    }

    /// Rebuild the grid state from the spectral coefficients.
    fn resync(&self, state: &mut JumpState) -> Result<()> {
        let inv = 1.0 / self.coeff_scale;
        let scaled: Vec<f64> = state.vhat.iter().map(|c| c * inv).collect();
        self.problem.basis.reconstruct_into(&scaled, &mut state.v)?;
        state.since_refresh = 0;
        Ok(())
    }

    /// One full step: holding time, jump choice, state update.
    pub fn step(&self, state: &mut JumpState, rng: &mut RngStream) -> Result<EventRecord> {
        let holding = sample_holding(state.rates.total, rng)?;
        let (mode, direction) = sample_jump(&state.rates, rng);
        let record = EventRecord {
            step: state.step_count,
            t_before: state.t,
            holding,
            mode,
            direction,
        };
        state.t += holding;
        self.apply_jump(state, mode, direction)?;
        Ok(record)
    }

    /// Run the event loop until `horizon`.
    ///
    /// The jump scheduled past the horizon is not applied: on return `state`
    /// holds the value of the interval covering `horizon` and `state.t` is
    /// set to `horizon` (the residual holding time is again exponential).
    pub fn simulate<O: Observer>(
        &self,
        state: &mut JumpState,
        horizon: f64,
        mut observer: O,
        rng: &mut RngStream,
    ) -> Result<SimulationOutcome> {
        if !(horizon >= state.t) {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} precedes the current time {}",
                state.t
            )));
        }
        let mut events = 0u64;
        while state.t < horizon {
            if events >= self.options.step_budget {
                return Err(Error::BudgetExceeded {
                    budget: self.options.step_budget,
                    t: state.t,
                    horizon,
                });
            }
            let holding = sample_holding(state.rates.total, rng)?;
            let start = state.t;
            let end = start + holding;
            if end >= horizon {
                let flow = observer.on_hold(state, start, horizon);
                state.t = horizon;
                return Ok(SimulationOutcome {
                    events,
                    stopped_early: flow.is_break(),
                });
            }
            if observer.on_hold(state, start, end).is_break() {
                state.t = end;
                return Ok(SimulationOutcome {
                    events,
                    stopped_early: true,
                });
            }
            let (mode, direction) = sample_jump(&state.rates, rng);
            let record = EventRecord {
                step: state.step_count,
                t_before: start,
                holding,
                mode,
                direction,
            };
            observer.on_jump(state, &record);
            state.t = end;
            self.apply_jump(state, mode, direction)?;
            events += 1;
        }
        Ok(SimulationOutcome {
            events,
            stopped_early: false,
        })
    }

    /// Start from `v0` at time 0 and run to `horizon`.
    pub fn run<O: Observer>(
        &self,
        v0: Vec<f64>,
        horizon: f64,
        observer: O,
        rng: &mut RngStream,
    ) -> Result<JumpState> {
        let mut state = self.init_state(v0, 0.0)?;
        self.simulate(&mut state, horizon, observer, rng)?;
        Ok(state)
    }
}
