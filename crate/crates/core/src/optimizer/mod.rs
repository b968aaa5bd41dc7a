//! Level-set gradient flow for `F_p(λ(Ω)) + |Ω| + E(Ω)` and the
//! p-continuation schedule.

mod velocity;

pub use velocity::{advect, smooth_boundary_field, extend_velocity, godunov_gradient, shape_velocity, BAND_CELLS};

use crate::domain::{extract_boundary, reinitialize, volume, DomainError, GridDomain, ReinitParams};
use crate::objective::{
    eval_f, eval_fp, grad_fp, penalty_value, xi0_field, ObjectiveError, ObjectiveSpec, PenaltySpec,
    RegularizationParams, WeightVector,
};
use crate::spectral::{solve_spectrum, SpectralError, Spectrum, SpectrumOptions, CLUSTER_REL_GAP};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Accepted steps may raise the objective by at most this much.
pub const DESCENT_SLACK: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid optimizer config: {0}")]
    Config(String),
    #[error("no reliable boundary samples")]
    NoReliableBoundary,
    #[error("p schedule must be ascending")]
    Schedule,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub spec: ObjectiveSpec,
    pub reg: RegularizationParams,
    pub pen: PenaltySpec,
    /// initial pseudo-time step, before the CFL cap
    pub dt0: f64,
    pub max_steps: usize,
    /// stop once `patience` consecutive accepted steps each lower the
    /// objective by less than this, relatively
    pub conv_tol: f64,
    pub patience: usize,
    /// reinitialize φ on every `reinit_every`-th step
    pub reinit_every: usize,
    pub seed: u64,
    /// backtracking halvings before a step is declared stalled
    pub max_backtracks: usize,
    /// dt growth factor after an accepted step
    pub growth: f64,
    pub eig_tol: f64,
    /// width of the boundary smoothing of the velocity, in cells; 0 disables
    pub smooth_cells: f64,
}

impl OptimizerConfig {
    pub fn new(spec: ObjectiveSpec, p: f64) -> Result<Self, OptimizerError> {
        Ok(Self {
            spec,
            reg: RegularizationParams::new(p)?,
            pen: PenaltySpec::default(),
            dt0: 0.5,
            max_steps: 400,
            conv_tol: 1e-5,
            patience: 3,
            reinit_every: 5,
            seed: 0,
            max_backtracks: 8,
            growth: 1.5,
            eig_tol: 1e-8,
            smooth_cells: 2.0,
        })
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::Config(m.to_string()));
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return bad("dt0 must be positive");
        }
        if !(self.conv_tol > 0.0) {
            return bad("conv_tol must be positive");
        }
        if self.reinit_every == 0 {
            return bad("reinit_every must be at least 1");
        }
        if !(self.smooth_cells >= 0.0) {
            return bad("smooth_cells must be nonnegative");
        }
        if !(self.growth >= 1.0) {
            return bad("growth must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StopReason {
    Converged,
    MaxSteps,
    Stalled,
    /// eigensolver or domain failure mid-run
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// `F_p(λ) + |Ω| + E(Ω)`
    pub objective: f64,
    pub volume: f64,
    pub lambdas: Vec<f64>,
    pub xi_sum: f64,
    pub penalty: f64,
    /// accepted step size, 0 for the initial record
    pub dt: f64,
}

/// A domain with everything the flow needs to know about it.
#[derive(Debug, Clone)]
pub struct State {
    pub domain: GridDomain,
    pub spectrum: Spectrum,
    pub weights: WeightVector,
    pub volume: f64,
    pub penalty: f64,
    pub objective: f64,
}

impl State {
    pub fn evaluate(d: GridDomain, cfg: &OptimizerConfig, warm: Option<&Spectrum>) -> Result<Self, OptimizerError> {
        d.ensure_nonempty()?;
        let mut opts = SpectrumOptions::new(cfg.spec.n())
            .with_seed(cfg.seed)
            .with_tol(cfg.eig_tol);
        if let Some(w) = warm {
            opts = opts.with_warm_start(w.modes.clone());
        }
        let spectrum = solve_spectrum(&d, &opts)?;
        let vol = volume(&d);
        let penalty = penalty_value(&d, &cfg.pen)?;
        let fp = eval_fp(&cfg.spec, &spectrum.lambdas, &cfg.reg)?;
        let xi = grad_fp(&cfg.spec, &spectrum.lambdas, &cfg.reg)?;
        let weights = WeightVector::new(xi, &spectrum.lambdas, CLUSTER_REL_GAP, xi0_field(&d, &cfg.pen)?);
        Ok(Self {
            domain: d,
            spectrum,
            weights,
            volume: vol,
            penalty,
            objective: fp + vol + penalty,
        })
    }

    /// `F(λ) + |Ω|` without regularization or penalty.
    pub fn plain_objective(&self, spec: &ObjectiveSpec) -> Result<f64, ObjectiveError> {
        Ok(eval_f(spec, &self.spectrum.lambdas)? + self.volume)
    }

    fn record(&self, step: usize, dt: f64) -> StepRecord {
        StepRecord {
            step,
            objective: self.objective,
            volume: self.volume,
            lambdas: self.spectrum.lambdas.clone(),
            xi_sum: self.weights.xi.iter().sum(),
            penalty: self.penalty,
            dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Accepted { dt: f64, decrease: f64 },
    /// no step was taken and the objective is flat to `conv_tol` along the flow
    Flat,
    Stalled,
}

/// One optimizer run: current state plus the dt controller.
#[derive(Debug)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    state: State,
    dt: f64,
    steps: usize,
    records: Vec<StepRecord>,
}

impl Optimizer {
    pub fn new(cfg: OptimizerConfig, init: GridDomain) -> Result<Self, OptimizerError> {
        cfg.validate()?;
        let state = State::evaluate(init, &cfg, None)?;
        let records = vec![state.record(0, 0.0)];
        Ok(Self {
            dt: cfg.dt0,
            cfg,
            state,
            steps: 0,
            records,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    /// Extended velocity of the current state.
    pub fn velocity(&self) -> Result<Vec<f64>, OptimizerError> {
        let d = &self.state.domain;
        let bm = extract_boundary(d);
        let v = shape_velocity(&self.state.spectrum, &self.state.weights, &bm, d);
        if !v.iter().any(|x| x.is_some()) {
            return Err(OptimizerError::NoReliableBoundary);
        }
        let v = smooth_boundary_field(d, &bm, &v, self.cfg.smooth_cells * d.grid().h());
        Ok(extend_velocity(d, &bm, &v))
    }

    /// Advects with the given velocity and step, optionally reinitializing.
    fn trial(&self, speed: &[f64], dt: f64, reinit: bool) -> Result<State, OptimizerError> {
        let mut d = advect(&self.state.domain, speed, dt)?;
        if reinit {
            d = reinitialize(&d, &ReinitParams::default())?.0;
        }
        State::evaluate(d, &self.cfg, Some(&self.state.spectrum))
    }

    /// One backtracking step. Errors only when the current state yields no
    /// usable velocity.
    pub fn step(&mut self) -> Result<StepOutcome, OptimizerError> {
        let speed = self.velocity()?;
        let vmax = speed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if vmax == 0.0 {
            return Ok(StepOutcome::Flat);
        }
        let h = self.state.domain.grid().h();
        let dt0 = self.dt.min(h / vmax);
        let old = self.state.objective;
        // reinitialization shifts the interface by O(h²) whatever dt is, which
        // can mask descent near a minimizer; it is skipped for this step then
        let due = (self.steps + 1).is_multiple_of(self.cfg.reinit_every);
        let passes: &[bool] = if due { &[true, false] } else { &[false] };
        let mut last_change = f64::INFINITY;
        let mut dt = dt0;
        for &reinit in passes {
            dt = dt0;
            for _ in 0..=self.cfg.max_backtracks {
                match self.trial(&speed, dt, reinit) {
                    Ok(next) if next.objective <= old + DESCENT_SLACK => {
                        let decrease = old - next.objective;
                        self.steps += 1;
                        self.state = next;
                        self.records.push(self.state.record(self.steps, dt));
                        self.dt = dt * self.cfg.growth;
                        return Ok(StepOutcome::Accepted { dt, decrease });
                    }
                    Ok(next) => last_change = (next.objective - old).abs(),
                    Err(_) => last_change = f64::INFINITY,
                }
                dt *= 0.5;
            }
        }
        self.dt = dt.max(1e-12);
        if last_change <= self.cfg.conv_tol * old.abs() {
            Ok(StepOutcome::Flat)
        } else {
            Ok(StepOutcome::Stalled)
        }
    }

    pub fn run(mut self) -> OptimizerTrace {
        let mut stop = StopReason::MaxSteps;
        let mut small = 0;
        while self.steps < self.cfg.max_steps {
            match self.step() {
                Ok(StepOutcome::Accepted { decrease, .. }) => {
                    if decrease < self.cfg.conv_tol * self.state.objective.abs() {
                        small += 1;
                    } else {
                        small = 0;
                    }
                    if small >= self.cfg.patience.max(1) {
                        stop = StopReason::Converged;
                        break;
                    }
                }
                Ok(StepOutcome::Flat) => {
                    stop = StopReason::Converged;
                    break;
                }
                Ok(StepOutcome::Stalled) => {
                    stop = StopReason::Stalled;
                    break;
                }
                Err(_) => {
                    stop = StopReason::Failed;
                    break;
                }
            }
        }
        OptimizerTrace {
            p: self.cfg.reg.p,
            records: self.records,
            state: self.state,
            stop,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    pub p: f64,
    pub records: Vec<StepRecord>,
    /// final domain, spectrum and weights
    pub state: State,
    pub stop: StopReason,
}

impl OptimizerTrace {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn domain(&self) -> &GridDomain {
        &self.state.domain
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.state.spectrum
    }

    pub fn weights(&self) -> &WeightVector {
        &self.state.weights
    }

    /// `step,objective,volume,lambda1..lambdaN,E,dt`
    pub fn to_csv(&self) -> String {
        let n = self.state.spectrum.lambdas.len();
        let mut s = String::from("step,objective,volume");
        for k in 1..=n {
            let _ = write!(s, ",lambda{k}");
        }
        s.push_str(",E,dt\n");
        for r in &self.records {
            let _ = write!(s, "{},{:e},{:e}", r.step, r.objective, r.volume);
            for l in &r.lambdas {
                let _ = write!(s, ",{l:e}");
            }
            let _ = writeln!(s, ",{:e},{:e}", r.penalty, r.dt);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Runs the flow from `init` until convergence, stall or `max_steps`.
/// A failure after the first evaluation ends the run with
/// [`StopReason::Failed`] and the partial trace.
pub fn optimize(cfg: &OptimizerConfig, init: GridDomain) -> Result<OptimizerTrace, OptimizerError> {
    Ok(Optimizer::new(cfg.clone(), init)?.run())
}

/// Completed stages of a p-continuation, plus the error that cut it short.
#[derive(Debug)]
pub struct Continuation {
    pub stages: Vec<OptimizerTrace>,
    pub error: Option<OptimizerError>,
}

impl Continuation {
    /// `p,k,xi` rows, raw weights, one block per stage.
    pub fn xi_csv(&self) -> String {
        let mut s = String::from("p,k,xi\n");
        for t in &self.stages {
            for (k, x) in t.state.weights.xi.iter().enumerate() {
                let _ = writeln!(s, "{},{},{:e}", t.p, k + 1, x);
            }
        }
        s
    }
}

/// Runs the flow once per exponent, each stage warm-started from the
/// previous minimizer. From the second stage on, a penalty with `s > 0`
/// is anchored at the previous minimizer.
pub fn p_continuation(cfg: &OptimizerConfig, init: GridDomain, schedule: &[f64]) -> Continuation {
    let mut out = Continuation {
        stages: Vec::new(),
        error: None,
    };
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        out.error = Some(OptimizerError::Schedule);
        return out;
    }
    let mut current = init;
    for &p in schedule {
        let mut stage = cfg.clone();
        stage.reg = match RegularizationParams::with_nodes(p, cfg.reg.quad_nodes) {
            Ok(r) => r,
            Err(e) => {
                out.error = Some(e.into());
                return out;
            }
        };
        stage.pen.reference = None;
        if !out.stages.is_empty() && cfg.pen.s > 0.0 {
            stage.pen = stage.pen.with_reference(&current);
        }
        match optimize(&stage, current.clone()) {
            Ok(t) => {
                current = t.state.domain.clone();
                let failed = t.stop == StopReason::Failed;
                out.stages.push(t);
                if failed {
                    return out;
                }
            }
            Err(e) => {
                out.error = Some(e);
                return out;
            }
        }
    }
    out
}
