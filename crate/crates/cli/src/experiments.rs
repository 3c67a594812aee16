//! The experiment families. Each one writes its tables into the output
//! directory and returns a list of pass/fail verdicts.

use std::fs;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::sync::Arc;

use spectrwm::baselines::{run_chain, CnConfig, CrankNicolson, PcnConfig, PcnSampler};
use spectrwm::estimators::{
    estimate_fixed_time, estimate_fixed_time_and_path_integral, holding_time_study,
    least_squares, run_replicas, ConvergenceReport, ConvergenceRow, Estimate, FnObservable,
    HoldingRow, TimeAverage,
};
use spectrwm::oracles::{
    generator_residual, ou_second_moment_time_integral, scalar_surrogate_second_moment,
    semidiscrete_ou_moments, QuadraticTestFunction,
};
use spectrwm::rng::derive_seed;
use spectrwm::{
    Error, InitialCondition, JumpKernel, JumpState, KernelOptions, LangevinTarget, ModeShape,
    ModelSpec, Nonlinearity, Observer, RngStream, Semidiscretization, Variant,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::csv::{emit_csv, Cell, Table};
use crate::error::{CliError, CliResult};

/// Standard errors allowed between an estimate and its reference.
pub const SIGMA_TOLERANCE: f64 = 3.0;
/// Accepted range of the fitted convergence order.
pub const SLOPE_RANGE: (f64, f64) = (1.6, 2.4);
/// Accepted deviation of the generator-residual slope from 2.
pub const GENERATOR_SLOPE_TOLERANCE: f64 = 0.2;
/// Minimum ratio of the Crank–Nicolson amplitude to the exact decay.
pub const CN_DAMPING_FACTOR: f64 = 10.0;
/// Number of trajectory snapshot times.
pub const SNAPSHOTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: Experiment,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
    /// Free-form lines for the terminal (burgers/kpz verdict, rates, ...).
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// 0 when every verdict passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn emit(&mut self, name: &str, table: &Table) -> CliResult<()> {
        let path = self.dir.join(name);
        emit_csv(table, &path)?;
        self.files.push(path);
        Ok(())
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        self.files.push(path);
        Ok(())
    }
}

/// Contents of `meta.txt`: version comments followed by every resolved key.
pub fn meta_text(cfg: &ExperimentConfig) -> String {
    format!(
        "# spectrwm-cli {}\n# spectrwm {}\n{}",
        env!("CARGO_PKG_VERSION"),
        spectrwm::VERSION,
        cfg.to_config_text()
    )
}

/// Run one experiment and write its artifacts under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Report> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
        path: cfg.out.clone(),
        source: e,
    })?;
    let mut out = Output {
        dir: cfg.out.clone(),
        files: Vec::new(),
    };
    out.write("meta.txt", &meta_text(cfg))?;
    let mut notes = Vec::new();
    let verdicts = match cfg.experiment {
        Experiment::HeatAccuracy => heat_accuracy(cfg, &mut out)?,
        Experiment::HeatCnCompare => heat_cn_compare(cfg, &mut out)?,
        Experiment::LangevinErgodic => langevin_ergodic(cfg, &mut out, &mut notes)?,
        Experiment::Burgers | Experiment::Kpz => boundedness(cfg, &mut out, &mut notes)?,
        Experiment::HoldingScaling => holding_scaling(cfg, &mut out)?,
        Experiment::Consistency => consistency(cfg, &mut out)?,
    };
    Ok(Report {
        experiment: cfg.experiment,
        verdicts,
        files: out.files,
        notes,
    })
}

fn options(cfg: &ExperimentConfig) -> KernelOptions {
    KernelOptions {
        step_budget: cfg.budget,
        ..KernelOptions::default()
    }
}

fn within(estimate: f64, reference: f64, stderr: f64) -> bool {
    (estimate - reference).abs() <= SIGMA_TOLERANCE * stderr
}

/// Largest `|estimate − reference|/stderr` over a set of comparisons.
fn worst_z(items: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    items
        .map(|(e, r, s)| {
            let d = (e - r).abs();
            if d == 0.0 {
                0.0
            } else {
                d / s
            }
        })
        .fold(0.0, f64::max)
}

const CONVERGENCE_HEADER: [&str; 6] = ["h", "n", "estimate", "stderr", "oracle", "abs_error"];

fn convergence_table(report: &ConvergenceReport) -> Table {
    let mut t = Table::new(&CONVERGENCE_HEADER);
    for r in &report.rows {
        t.push(vec![
            r.h.into(),
            r.n.into(),
            r.estimate.into(),
            r.stderr.into(),
            r.oracle.into(),
            r.abs_error.into(),
        ]);
    }
    t
}

fn slope_verdict(name: &str, report: &ConvergenceReport) -> Verdict {
    match report.slope {
        Some(s) => {
            let se = report
                .slope_stderr
                .map(|x| format!(" ± {x:.3}"))
                .unwrap_or_default();
            Verdict::new(
                name,
                (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&s),
                format!(
                    "slope {s:.3}{se} from {} of {} rows, accepted [{}, {}]",
                    report.fitted_rows,
                    report.rows.len(),
                    SLOPE_RANGE.0,
                    SLOPE_RANGE.1
                ),
            )
        }
        None => Verdict::new(
            name,
            false,
            format!(
                "inconclusive: {} of {} rows have an error above {SIGMA_TOLERANCE}·stderr",
                report.fitted_rows,
                report.rows.len()
            ),
        ),
    }
}

fn heat_accuracy(cfg: &ExperimentConfig, out: &mut Output) -> CliResult<Vec<Verdict>> {
    let model = ModelSpec::heat(cfg.lambda, cfg.sigma).with_initial_condition(cfg.ic.clone());
    let problem = Arc::new(Semidiscretization::new(cfg.n, model)?);
    let n = cfg.n;
    let v0 = problem.initial_state();
    let fixed_oracle = semidiscrete_ou_moments(cfg.t, &problem, &v0)?.grid_second_moment(&problem);
    let path_oracle = ou_second_moment_time_integral(cfg.t, &problem, &v0)?;
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (fixed_ms, path_ms) = (mean(&fixed_oracle), mean(&path_oracle));

    // v_j² for every j, their average, and the constant 1
    let observable = FnObservable::new(n + 2, |v: &[f64], o: &mut [f64]| {
        let mut s = 0.0;
        for (oj, x) in o.iter_mut().zip(v) {
            *oj = x * x;
            s += *oj;
        }
        o[v.len()] = s / v.len() as f64;
        o[v.len() + 1] = 1.0;
    });
    let mut constant_exact = true;

    let mut fixed_rows = Vec::new();
    let mut path_rows = Vec::new();
    let mut finest: Option<(f64, Estimate, Estimate)> = None;
    let row = |h: f64, e: &Estimate, oracle: f64| ConvergenceRow {
        h,
        n,
        estimate: e.mean[n],
        stderr: e.stderr[n],
        oracle,
        abs_error: (e.mean[n] - oracle).abs(),
    };
    for (i, &h) in cfg.h_list.iter().enumerate() {
        let kernel = JumpKernel::with_options(problem.clone(), cfg.variant, h, options(cfg))?;
        let (fixed, path) = estimate_fixed_time_and_path_integral(
            &kernel,
            &v0,
            cfg.t,
            &observable,
            cfg.replicas,
            derive_seed(cfg.seed, i as u64),
        )?;
        constant_exact &= path.mean[n + 1] == cfg.t && path.stderr[n + 1] == 0.0;
        fixed_rows.push(row(h, &fixed, fixed_ms));
        path_rows.push(row(h, &path, path_ms));
        if finest.as_ref().is_none_or(|f| h < f.0) {
            finest = Some((h, fixed, path));
        }
    }
    let fixed_report = ConvergenceReport::from_rows(fixed_rows);
    let path_report = ConvergenceReport::from_rows(path_rows);
    out.emit("results.csv", &convergence_table(&fixed_report))?;
    out.emit("path_integral.csv", &convergence_table(&path_report))?;

    let (h, fixed, path) =
        finest.ok_or_else(|| CliError::Config("h-list must not be empty".into()))?;
    let mut t = Table::new(&[
        "j",
        "x",
        "second_moment",
        "stderr",
        "oracle",
        "time_integral",
        "time_integral_stderr",
        "time_integral_oracle",
    ]);
    for j in 0..n {
        t.push(vec![
            j.into(),
            problem.grid.x(j).into(),
            fixed.mean[j].into(),
            fixed.stderr[j].into(),
            fixed_oracle[j].into(),
            path.mean[j].into(),
            path.stderr[j].into(),
            path_oracle[j].into(),
        ]);
    }
    out.emit("pointwise.csv", &t)?;

    let fixed_ok = (0..n).all(|j| within(fixed.mean[j], fixed_oracle[j], fixed.stderr[j]));
    let path_ok = (0..n).all(|j| within(path.mean[j], path_oracle[j], path.stderr[j]));
    let zf = worst_z((0..n).map(|j| (fixed.mean[j], fixed_oracle[j], fixed.stderr[j])));
    let zp = worst_z((0..n).map(|j| (path.mean[j], path_oracle[j], path.stderr[j])));
    Ok(vec![
        Verdict::new(
            "pointwise-second-moment",
            fixed_ok,
            format!("h = {h}: worst deviation {zf:.2} stderr over {n} points"),
        ),
        Verdict::new(
            "pointwise-time-integral",
            path_ok,
            format!("h = {h}: worst deviation {zp:.2} stderr over {n} points"),
        ),
        slope_verdict("convergence-slope", &fixed_report),
        Verdict::new(
            "constant-time-integral",
            constant_exact,
            format!("∫₀ᵀ 1 dt against T = {} at every h, exact match required", cfg.t),
        ),
    ])
}

fn heat_cn_compare(cfg: &ExperimentConfig, out: &mut Output) -> CliResult<Vec<Verdict>> {
    let cn = CrankNicolson::new(CnConfig {
        n: cfg.cn_n,
        dt: cfg.dt,
        sigma: cfg.sigma,
        lambda: cfg.lambda,
    })?;
    let steps = ((cfg.t / cfg.dt).round() as usize).max(1);
    let cn_t = steps as f64 * cfg.dt;
    let cn_basis = &cn.problem().basis;
    let u0 = cfg.ic.sample(&cn.problem().grid);
    let c0 = cn_basis.to_spectral(&u0)?.coeffs;
    let c1 = cn_basis.to_spectral(&cn.run(&u0, steps, None)?)?.coeffs;

    let model = ModelSpec::heat(cfg.lambda, cfg.sigma).with_initial_condition(cfg.ic.clone());
    let problem = Arc::new(Semidiscretization::new(cfg.n, model)?);
    let v0 = problem.initial_state();
    let ou = semidiscrete_ou_moments(cfg.t, &problem, &v0)?;

    let wavenumbers: Vec<usize> = match &cfg.ic {
        InitialCondition::HighFrequency => InitialCondition::HIGH_FREQUENCY_MODES.to_vec(),
        _ => (1..=cfg.cn_n / 2).filter(|&k| {
            cn_basis
                .index_of(k, ModeShape::Cos)
                .is_some_and(|i| c0[i].abs() > 1e-12)
        })
        .collect(),
    };
    // modes the jump grid resolves; on a coarse grid higher wavenumbers alias onto them
    let jump_modes: Vec<(usize, usize)> = wavenumbers
        .iter()
        .filter_map(|&k| problem.basis.index_of(k, ModeShape::Cos).map(|i| (k, i)))
        .collect();
    let idx: Vec<usize> = jump_modes.iter().map(|m| m.1).collect();
    let basis = problem.basis.clone();
    let observable = FnObservable::new(idx.len(), move |v: &[f64], o: &mut [f64]| {
        for (oj, &i) in o.iter_mut().zip(&idx) {
            *oj = basis.vector(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    });
    let kernel = JumpKernel::with_options(problem.clone(), cfg.variant, cfg.h, options(cfg))?;
    let est = estimate_fixed_time(&kernel, &v0, cfg.t, &observable, cfg.replicas, cfg.seed)?;

    let mut t = Table::new(&[
        "k",
        "cn_t",
        "exact_decay",
        "cn_decay",
        "cn_ratio",
        "jump_t",
        "jump_amplitude",
        "jump_stderr",
        "jump_oracle",
    ]);
    let mut stiffest: Option<(usize, f64)> = None;
    let mut jump_ok = true;
    let mut z = Vec::new();
    for &k in &wavenumbers {
        let (exact, cn_decay, ratio) = match cn_basis.index_of(k, ModeShape::Cos) {
            Some(i) => {
                let exact = (cn_basis.eigenvalue(i) * cn_t).exp();
                let d = c1[i] / c0[i];
                (exact, d, d.abs() / exact)
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        if ratio.is_finite() && stiffest.is_none_or(|s| k > s.0) {
            stiffest = Some((k, ratio));
        }
        let jump = jump_modes.iter().position(|m| m.0 == k).map(|p| {
            let i = jump_modes[p].1;
            (est.mean[p], est.stderr[p], ou.mean[i])
        });
        let (a, s, o) = jump.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        if let Some((a, s, o)) = jump {
            jump_ok &= within(a, o, s);
            z.push((a, o, s));
        }
        t.push(vec![
            k.into(),
            cn_t.into(),
            exact.into(),
            cn_decay.into(),
            ratio.into(),
            cfg.t.into(),
            a.into(),
            s.into(),
            o.into(),
        ]);
    }
    out.emit("results.csv", &t)?;

    let cn_verdict = match stiffest {
        Some((k, r)) => Verdict::new(
            "cn-underdamps-stiff-mode",
            r > CN_DAMPING_FACTOR,
            format!("mode {k}: CN amplitude / exact decay = {r:.3e} after {steps} steps (needs > {CN_DAMPING_FACTOR})"),
        ),
        None => Verdict::new("cn-underdamps-stiff-mode", false, "no resolved mode".into()),
    };
    Ok(vec![
        cn_verdict,
        Verdict::new(
            "jump-mode-amplitudes",
            jump_ok && !z.is_empty(),
            format!(
                "{} modes, worst deviation {:.2} stderr",
                z.len(),
                worst_z(z.into_iter())
            ),
        ),
    ])
}

/// Feeds holding intervals into a [`TimeAverage`] of `(v, v²)`.
struct MomentWindow {
    n: usize,
    avg: TimeAverage,
    scratch: Vec<f64>,
}

impl MomentWindow {
    fn new(n: usize, horizon: f64, burn_in: f64, batches: usize) -> spectrwm::Result<Self> {
        Ok(Self {
            n,
            avg: TimeAverage::new(2 * n, burn_in * horizon, horizon, batches)?,
            scratch: vec![0.0; 2 * n],
        })
    }
}

impl Observer for MomentWindow {
    fn on_hold(&mut self, state: &JumpState, start: f64, end: f64) -> ControlFlow<()> {
        for (j, &x) in state.v.iter().enumerate() {
            self.scratch[j] = x;
            self.scratch[self.n + j] = x * x;
        }
        self.avg.add(&self.scratch, start, end);
        ControlFlow::Continue(())
    }
}

fn langevin_ergodic(
    cfg: &ExperimentConfig,
    out: &mut Output,
    notes: &mut Vec<String>,
) -> CliResult<Vec<Verdict>> {
    let n = cfg.n;
    let model = ModelSpec::langevin(cfg.sigma).with_initial_condition(cfg.ic.clone());
    let problem = Arc::new(Semidiscretization::new(n, model)?);
    let v0 = problem.initial_state();
    let kernel = JumpKernel::with_options(problem.clone(), cfg.variant, cfg.h, options(cfg))?;

    // per-replica time averages over [burn-in·T, T]
    let jump = run_replicas(cfg.replicas, cfg.seed, 2 * n, |rng| {
        let mut state = kernel.init_state(v0.clone(), 0.0)?;
        let mut window = MomentWindow::new(n, cfg.t, cfg.burn_in, cfg.batches)?;
        let o = kernel.simulate(&mut state, cfg.t, &mut window, rng)?;
        Ok((window.avg.mean(), o.events))
    })?;
    notes.push(format!(
        "jump process: {} replicas, {} events",
        jump.replicas, jump.events
    ));

    let sampler = PcnSampler::new(
        LangevinTarget::for_problem(&problem)?,
        PcnConfig {
            rho: cfg.rho,
            batches: cfg.batches,
            ..PcnConfig::default()
        },
    )?;
    let burn = (cfg.burn_in * cfg.pcn_steps as f64) as u64;
    let mut rng = RngStream::new(derive_seed(cfg.seed, 1), 0);
    let chain = run_chain(&sampler, v0.clone(), cfg.pcn_steps, burn, &mut rng)?;
    notes.push(format!(
        "pCN: {} steps, acceptance rate {:.3}",
        chain.steps, chain.acceptance_rate
    ));
    let (bm, bms) = (chain.mean(), chain.mean_stderr());
    let (b2, b2s) = (chain.second_moment(), chain.second_moment_stderr());

    let mut t = Table::new(&[
        "component",
        "mean",
        "stderr",
        "second_moment",
        "stderr2",
        "benchmark_mean",
        "benchmark_second",
    ]);
    let mut bt = Table::new(&["component", "mean", "stderr", "second_moment", "stderr2"]);
    let (mut first_ok, mut second_ok) = (true, true);
    let (mut z1, mut z2) = (Vec::new(), Vec::new());
    for j in 0..n {
        let (m, ms) = (jump.mean[j], jump.stderr[j]);
        let (s, ss) = (jump.mean[n + j], jump.stderr[n + j]);
        let combined = (ss * ss + b2s[j] * b2s[j]).sqrt();
        first_ok &= within(m, 0.0, ms);
        second_ok &= within(s, b2[j], combined);
        z1.push((m, 0.0, ms));
        z2.push((s, b2[j], combined));
        t.push(vec![
            j.into(),
            m.into(),
            ms.into(),
            s.into(),
            ss.into(),
            bm[j].into(),
            b2[j].into(),
        ]);
        bt.push(vec![j.into(), bm[j].into(), bms[j].into(), b2[j].into(), b2s[j].into()]);
    }
    out.emit("results.csv", &t)?;
    out.emit("benchmark.csv", &bt)?;

    // one-cell surrogate, single long run with batch means
    let sk = JumpKernel::detailed_balance(
        LangevinTarget::scalar_surrogate(cfg.sigma),
        cfg.surrogate_h,
        options(cfg),
    )?;
    let mut window = MomentWindow::new(1, cfg.surrogate_t, cfg.burn_in, cfg.batches)?;
    let mut srng = RngStream::new(derive_seed(cfg.seed, 2), 0);
    sk.run(vec![0.0], cfg.surrogate_t, &mut window, &mut srng)?;
    let (sm, ss) = (window.avg.mean()[1], window.avg.stderr()[1]);
    let exact = scalar_surrogate_second_moment(cfg.sigma);
    let mut st = Table::new(&["h", "t", "second_moment", "stderr", "quadrature"]);
    st.push(vec![
        cfg.surrogate_h.into(),
        cfg.surrogate_t.into(),
        sm.into(),
        ss.into(),
        exact.into(),
    ]);
    out.emit("surrogate.csv", &st)?;

    Ok(vec![
        Verdict::new(
            "first-moments-vanish",
            first_ok,
            format!("worst deviation {:.2} stderr over {n} components", worst_z(z1.into_iter())),
        ),
        Verdict::new(
            "second-moments-match-pcn",
            second_ok,
            format!(
                "worst deviation {:.2} combined stderr over {n} components",
                worst_z(z2.into_iter())
            ),
        ),
        Verdict::new(
            "scalar-surrogate",
            within(sm, exact, ss),
            format!("{sm:.5} ± {ss:.5} vs {exact:.5}"),
        ),
    ])
}

/// Tracks `max|u|` and `|mean u|`, stops the run past the threshold and
/// optionally records snapshots at fixed output times.
struct Watch {
    threshold: f64,
    peak: f64,
    peak_mean: f64,
    events: u64,
    exceeded: Option<f64>,
    times: Vec<f64>,
    next: usize,
    snapshots: Vec<(f64, Vec<f64>)>,
}

impl Watch {
    fn record_until(&mut self, v: &[f64], end: f64, inclusive: bool) {
        while self.next < self.times.len() {
            let t = self.times[self.next];
            if t < end || (inclusive && t <= end) {
                self.snapshots.push((t, v.to_vec()));
                self.next += 1;
            } else {
                break;
            }
        }
    }
}

impl Observer for Watch {
    fn on_hold(&mut self, state: &JumpState, start: f64, end: f64) -> ControlFlow<()> {
        let max_abs = state.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mean = (state.v.iter().sum::<f64>() / state.n() as f64).abs();
        self.peak = self.peak.max(max_abs);
        self.peak_mean = self.peak_mean.max(mean);
        if !(max_abs <= self.threshold && mean <= self.threshold) {
            self.exceeded = Some(start);
            return ControlFlow::Break(());
        }
        self.record_until(&state.v, end, false);
        ControlFlow::Continue(())
    }

    fn on_jump(&mut self, _state: &JumpState, _event: &spectrwm::EventRecord) {
        self.events += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Diverged,
}

impl Boundedness {
    pub fn label(self) -> &'static str {
        match self {
            Boundedness::Bounded => "BOUNDED",
            Boundedness::Diverged => "DIVERGED",
        }
    }
}

fn boundedness(
    cfg: &ExperimentConfig,
    out: &mut Output,
    notes: &mut Vec<String>,
) -> CliResult<Vec<Verdict>> {
    let model = match cfg.experiment {
        Experiment::Burgers => ModelSpec {
            half_factor: cfg.half_factor,
            ..ModelSpec::burgers(cfg.nu, cfg.sigma, cfg.nonlinearity)
        },
        _ => ModelSpec::kpz(cfg.lambda, cfg.sigma, cfg.nonlinearity),
    }
    .with_initial_condition(cfg.ic.clone());
    let problem = Arc::new(Semidiscretization::new(cfg.n, model)?);
    let kernel = JumpKernel::with_options(problem.clone(), cfg.variant, cfg.h, options(cfg))?;
    let v0 = problem.initial_state();
    let times: Vec<f64> = (0..SNAPSHOTS)
        .map(|k| cfg.t * k as f64 / (SNAPSHOTS - 1) as f64)
        .collect();

    let mut runs = Table::new(&["run", "verdict", "t_end", "max_abs", "max_abs_mean", "events", "reason"]);
    let mut verdicts = Vec::with_capacity(cfg.runs);
    let mut trajectory = Vec::new();
    for r in 0..cfg.runs {
        let mut rng = RngStream::new(cfg.seed, r as u64);
        let mut watch = Watch {
            threshold: cfg.threshold,
            peak: 0.0,
            peak_mean: 0.0,
            events: 0,
            exceeded: None,
            times: if r == 0 { times.clone() } else { Vec::new() },
            next: 0,
            snapshots: Vec::new(),
        };
        let mut state = kernel.init_state(v0.clone(), 0.0)?;
        let (verdict, t_end, reason) = match kernel.simulate(&mut state, cfg.t, &mut watch, &mut rng) {
            Ok(_) => match watch.exceeded {
                Some(t) => (Boundedness::Diverged, t, "threshold".to_string()),
                None => {
                    watch.record_until(&state.v, cfg.t, true);
                    (Boundedness::Bounded, cfg.t, String::new())
                }
            },
            Err(e @ (Error::Stiffness { .. } | Error::BudgetExceeded { .. })) => {
                let kind = if matches!(e, Error::Stiffness { .. }) { "stiffness" } else { "budget" };
                (Boundedness::Diverged, state.t, kind.to_string())
            }
            Err(e) => return Err(e.into()),
        };
        runs.push(vec![
            r.into(),
            verdict.label().into(),
            t_end.into(),
            watch.peak.into(),
            watch.peak_mean.into(),
            watch.events.into(),
            reason.into(),
        ]);
        verdicts.push(verdict);
        if r == 0 {
            trajectory = watch.snapshots;
        }
    }
    out.emit("results.csv", &runs)?;

    let mut header = vec!["t".to_string()];
    header.extend((0..cfg.n).map(|j| format!("x_{j}")));
    let mut traj = Table::new(&header);
    for (t, v) in trajectory {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(v.into_iter().map(Cell::from));
        traj.push(row);
    }
    out.emit("trajectory.csv", &traj)?;

    let diverged = verdicts.iter().filter(|&&v| v == Boundedness::Diverged).count();
    let overall = if diverged == 0 {
        "BOUNDED"
    } else if diverged == verdicts.len() {
        "DIVERGED"
    } else {
        "MIXED"
    };
    let line = format!(
        "{overall}: {} of {} runs diverged ({} {}, threshold {})",
        diverged,
        verdicts.len(),
        cfg.experiment,
        cfg.nonlinearity.name(),
        cfg.threshold
    );
    out.write("verdict.txt", &format!("{line}\n"))?;
    notes.push(line);

    let expected = match cfg.nonlinearity {
        Nonlinearity::Central => Boundedness::Bounded,
        Nonlinearity::OneSided => Boundedness::Diverged,
    };
    let hits = verdicts.iter().filter(|&&v| v == expected).count();
    Ok(vec![Verdict::new(
        match expected {
            Boundedness::Bounded => "stays-bounded",
            Boundedness::Diverged => "diverges",
        },
        hits == verdicts.len() && !verdicts.is_empty(),
        format!("{hits}/{} runs {}", verdicts.len(), expected.label()),
    )])
}

fn holding_scaling(cfg: &ExperimentConfig, out: &mut Output) -> CliResult<Vec<Verdict>> {
    let model = ModelSpec::heat(cfg.lambda, cfg.sigma);
    let variants = [Variant::Academic, Variant::Fast];
    let mut all: Vec<Vec<HoldingRow>> = Vec::new();
    for (k, &variant) in variants.iter().enumerate() {
        all.push(holding_time_study(
            &model,
            variant,
            &cfg.h_list,
            &cfg.n_list,
            cfg.samples,
            derive_seed(cfg.seed, k as u64),
        )?);
    }
    let mut t = Table::new(&["variant", "h", "n", "empirical_mean_dt", "analytic_mean_dt", "stderr"]);
    let mut rows_ok = true;
    let mut z = Vec::new();
    for r in all.iter().flatten() {
        rows_ok &= within(r.empirical_mean_dt, r.analytic_mean_dt, r.stderr);
        z.push((r.empirical_mean_dt, r.analytic_mean_dt, r.stderr));
        t.push(vec![
            r.variant.name().into(),
            r.h.into(),
            r.n.into(),
            r.empirical_mean_dt.into(),
            r.analytic_mean_dt.into(),
            r.stderr.into(),
        ]);
    }
    out.emit("results.csv", &t)?;

    let mut rt = Table::new(&["h", "n", "ratio", "stderr", "dx"]);
    let mut ratio_ok = true;
    let mut zr = Vec::new();
    for (a, f) in all[0].iter().zip(&all[1]) {
        let ratio = a.empirical_mean_dt / f.empirical_mean_dt;
        // delta method
        let se = ratio
            * ((a.stderr / a.empirical_mean_dt).powi(2) + (f.stderr / f.empirical_mean_dt).powi(2)).sqrt();
        let dx = std::f64::consts::TAU / a.n as f64;
        ratio_ok &= within(ratio, dx, se);
        zr.push((ratio, dx, se));
        rt.push(vec![a.h.into(), a.n.into(), ratio.into(), se.into(), dx.into()]);
    }
    out.emit("ratio.csv", &rt)?;
    Ok(vec![
        Verdict::new(
            "mean-holding-time",
            rows_ok,
            format!("{} rows, worst deviation {:.2} stderr", z.len(), worst_z(z.into_iter())),
        ),
        Verdict::new(
            "academic-over-fast-is-dx",
            ratio_ok,
            format!("{} pairs, worst deviation {:.2} stderr", zr.len(), worst_z(zr.into_iter())),
        ),
    ])
}

fn consistency(cfg: &ExperimentConfig, out: &mut Output) -> CliResult<Vec<Verdict>> {
    let problem = Arc::new(Semidiscretization::new(
        cfg.n,
        ModelSpec::heat(cfg.lambda, cfg.sigma),
    )?);
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut t = Table::new(&["function", "state", "h", "residual"]);
    let mut st = Table::new(&["function", "state", "slope", "slope_stderr"]);
    let mut slopes = Vec::new();
    for f_id in 0..cfg.tests {
        let f = QuadraticTestFunction::random(cfg.n, &mut rng);
        for s_id in 0..cfg.states {
            let v: Vec<f64> = (0..cfg.n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let mut pts = Vec::new();
            for &h in &cfg.h_list {
                let r = generator_residual(&f, &v, &problem, h)?;
                t.push(vec![f_id.into(), s_id.into(), h.into(), r.into()]);
                if r > 0.0 {
                    pts.push((h.ln(), r.ln()));
                }
            }
            let (slope, se) = match least_squares(&pts) {
                Some((b, se)) => (b, se.unwrap_or(f64::NAN)),
                None => (f64::NAN, f64::NAN),
            };
            slopes.push(slope);
            st.push(vec![f_id.into(), s_id.into(), slope.into(), se.into()]);
        }
    }
    out.emit("results.csv", &t)?;
    out.emit("slopes.csv", &st)?;
    let ok = !slopes.is_empty()
        && slopes
            .iter()
            .all(|s| (s - 2.0).abs() <= GENERATOR_SLOPE_TOLERANCE);
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![Verdict::new(
        "residual-slope",
        ok,
        format!(
            "{} cases, slopes in [{lo:.3}, {hi:.3}], accepted 2 ± {GENERATOR_SLOPE_TOLERANCE}",
            slopes.len()
        ),
    )])
}
