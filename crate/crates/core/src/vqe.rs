//! Classical outer loop: minimize the estimated energy over ansatz
//! parameters with a derivative-free optimizer.
//!
//! Two optimizers cover the two noise regimes: Nelder–Mead simplex for
//! exact or low-noise objectives, and SPSA for heavily sampled ones. Both
//! are driven through the same evaluation harness, which records every
//! objective evaluation in the trace, tracks the running best, and stops
//! on any of three conditions: the best energy stopped improving by at
//! least `f_tol` for a full patience window (converged), the evaluation
//! budget ran out, or the optimizer collapsed below machine resolution.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{
    allocate_shots, derive_seed, estimate_observable, estimate_observable_exact, ApplyMode, Part,
    PartSelection, ShotAllocation, ShotPlan,
};
use crate::simulator::AnsatzCircuit;
use crate::sparse::{QueryCounter, QueryCounts, SelfInverseTerm, WeightedTermList};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Derivative-free optimizer choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OptimizerKind {
    Simplex,
    Spsa,
}

/// Shots spent on each objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShotBudget {
    /// No sampling: every evaluation returns the exact expectation.
    Exact,
    /// A fixed number of shots for every term's real-part test.
    PerTerm(u64),
    /// Shots allocated from a target precision by the weighted rule.
    Epsilon(f64),
}

/// Why an optimization run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StopReason {
    /// Best energy stopped improving by `f_tol` for the patience window.
    Tolerance,
    /// Evaluation budget exhausted first.
    MaxIters,
    /// The optimizer's working set collapsed below machine resolution
    /// before the tolerance rule fired.
    Stalled,
}

/// Settings for one optimization run.
#[derive(Clone, Debug)]
pub struct VqeConfig {
    pub optimizer: OptimizerKind,
    /// Maximum number of objective evaluations (the trace never grows
    /// longer than this).
    pub max_iters: u64,
    /// Minimum best-energy improvement that counts as progress.
    pub f_tol: f64,
    pub seed: u64,
    pub budget: ShotBudget,
    /// Independent repeats from fresh starting points; all evaluations
    /// land in one concatenated trace.
    pub restarts: u64,
    /// How terms act on the state during sampled evaluations.
    pub mode: ApplyMode,
}

impl VqeConfig {
    /// Exact-objective simplex run with sensible defaults.
    pub fn exact(seed: u64) -> Self {
        VqeConfig {
            optimizer: OptimizerKind::Simplex,
            max_iters: 2000,
            f_tol: 1e-9,
            seed,
            budget: ShotBudget::Exact,
            restarts: 1,
            mode: ApplyMode::Direct,
        }
    }
}

/// One objective evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub std_error: f64,
    /// Cumulative shots consumed through this evaluation.
    pub total_shots: u64,
}

/// Everything a run produced: every evaluation, the best point, and why
/// it stopped.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizationTrace {
    pub iterations: Vec<IterationRecord>,
    pub best_theta: Vec<f64>,
    pub best_energy: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Oracle queries charged during evaluations (nonzero only in
    /// oracle-faithful mode).
    pub query_counts: QueryCounts,
}

struct Harness<'a> {
    terms: &'a WeightedTermList<SelfInverseTerm>,
    ansatz: &'a AnsatzCircuit,
    plan: Option<ShotPlan>,
    mode: ApplyMode,
    seed: u64,
    max_iters: u64,
    counter: QueryCounter,
    trace: Vec<IterationRecord>,
    cumulative_shots: u64,
    best_energy: f64,
    best_theta: Vec<f64>,
    budget_exhausted: bool,
}

impl<'a> Harness<'a> {
    /// Evaluate the energy at θ, recording the trace row. Returns `None`
    /// when the evaluation budget is already spent.
    fn evaluate(&mut self, theta: &[f64]) -> Result<Option<f64>> {
        if self.trace.len() as u64 >= self.max_iters {
            self.budget_exhausted = true;
            return Ok(None);
        }
        let (energy, std_error, shots) = match &self.plan {
            None => {
                let value =
                    estimate_observable_exact(self.terms, self.ansatz, theta, self.ansatz, theta)?;
                (value.re, 0.0, 0)
            }
            Some(plan) => {
                let eval_seed = derive_seed(self.seed, self.trace.len() as u64);
                let (value, std_error, _records): (Complex64, f64, _) = estimate_observable(
                    self.terms,
                    self.ansatz,
                    theta,
                    self.ansatz,
                    theta,
                    plan,
                    eval_seed,
                    self.mode,
                    &self.counter,
                )?;
                (value.re, std_error, plan.total_shots())
            }
        };
        self.cumulative_shots += shots;
        self.trace.push(IterationRecord {
            theta: theta.to_vec(),
            energy,
            std_error,
            total_shots: self.cumulative_shots,
        });
        if energy < self.best_energy {
            self.best_energy = energy;
            self.best_theta = theta.to_vec();
        }
        Ok(Some(energy))
    }
}

/// Patience window: how many consecutive optimizer steps may pass without
/// an f_tol-sized improvement of the best energy before the run counts as
/// converged. Tied to the dimension, with a floor that keeps one- and
/// two-parameter problems from quitting inside a single contraction
/// cycle.
fn patience_window(parameter_count: usize) -> u64 {
    (2 * parameter_count as u64).max(4)
}

struct ProgressGate {
    window: u64,
    stale_steps: u64,
    f_tol: f64,
    previous_best: f64,
}

impl ProgressGate {
    fn new(window: u64, f_tol: f64) -> Self {
        ProgressGate {
            window,
            stale_steps: 0,
            f_tol,
            previous_best: f64::INFINITY,
        }
    }

    /// Record one optimizer step's resulting best energy; true once the
    /// window is exhausted without progress.
    fn step(&mut self, best: f64) -> bool {
        if self.previous_best - best < self.f_tol {
            self.stale_steps += 1;
        } else {
            self.stale_steps = 0;
        }
        self.previous_best = best;
        self.stale_steps >= self.window
    }
}

struct RunOutcome {
    converged: bool,
    stop_reason: StopReason,
}

fn run_simplex(harness: &mut Harness, theta0: Vec<f64>, f_tol: f64) -> Result<RunOutcome> {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    const INITIAL_STEP: f64 = 0.25;

    let n = theta0.len();
    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    match harness.evaluate(&theta0)? {
        Some(e) => vertices.push((theta0.clone(), e)),
        None => {
            return Ok(RunOutcome {
                converged: false,
                stop_reason: StopReason::MaxIters,
            })
        }
    }
    for i in 0..n {
        let mut v = theta0.clone();
        v[i] += INITIAL_STEP;
        match harness.evaluate(&v)? {
            Some(e) => vertices.push((v, e)),
            None => {
                return Ok(RunOutcome {
                    converged: false,
                    stop_reason: StopReason::MaxIters,
                })
            }
        }
    }

    let mut gate = ProgressGate::new(patience_window(n), f_tol);
    loop {
        vertices.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

        let diameter = vertices[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&vertices[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        let scale = 1.0 + vertices[0].0.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if diameter < 1e-12 * scale {
            return Ok(RunOutcome {
                converged: false,
                stop_reason: StopReason::Stalled,
            });
        }

        let mut centroid = vec![0.0f64; n];
        for (v, _) in &vertices[..n] {
            for (c, t) in centroid.iter_mut().zip(v) {
                *c += t / n as f64;
            }
        }
        let worst = vertices[n].clone();
        let second_worst_energy = vertices[n - 1].1;
        let best_energy = vertices[0].1;

        let point = |coeff: f64, toward: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(toward)
                .map(|(c, w)| c + coeff * (w - c))
                .collect()
        };

        let reflected = point(-REFLECT, &worst.0);
        let f_reflected = match harness.evaluate(&reflected)? {
            Some(e) => e,
            None => {
                return Ok(RunOutcome {
                    converged: false,
                    stop_reason: StopReason::MaxIters,
                })
            }
        };

        if f_reflected < best_energy {
            // Doing well in this direction: try going further.
            let expanded = point(-EXPAND, &worst.0);
            match harness.evaluate(&expanded)? {
                Some(f_expanded) if f_expanded < f_reflected => {
                    vertices[n] = (expanded, f_expanded);
                }
                Some(_) => vertices[n] = (reflected, f_reflected),
                None => {
                    return Ok(RunOutcome {
                        converged: false,
                        stop_reason: StopReason::MaxIters,
                    })
                }
            }
        } else if f_reflected < second_worst_energy {
            vertices[n] = (reflected, f_reflected);
        } else {
            // Overshot: contract toward the better of worst and reflected.
            let (contracted, acceptance_bar) = if f_reflected < worst.1 {
                (point(CONTRACT, &reflected), f_reflected)
            } else {
                (point(CONTRACT, &worst.0), worst.1)
            };
            match harness.evaluate(&contracted)? {
                Some(f_contracted) if f_contracted <= acceptance_bar => {
                    vertices[n] = (contracted, f_contracted);
                }
                Some(_) => {
                    // Nothing along this line helps: shrink onto the best.
                    let best_point = vertices[0].0.clone();
                    for k in 1..=n {
                        let shrunk: Vec<f64> = best_point
                            .iter()
                            .zip(&vertices[k].0)
                            .map(|(b, v)| b + SHRINK * (v - b))
                            .collect();
                        match harness.evaluate(&shrunk)? {
                            Some(e) => vertices[k] = (shrunk, e),
                            None => {
                                return Ok(RunOutcome {
                                    converged: false,
                                    stop_reason: StopReason::MaxIters,
                                })
                            }
                        }
                    }
                }
                None => {
                    return Ok(RunOutcome {
                        converged: false,
                        stop_reason: StopReason::MaxIters,
                    })
                }
            }
        }

        // The patience window alone misfires mid-descent: the best vertex
        // routinely idles for many cycles while reflections and
        // contractions reorganize the rest of the simplex. Converged means
        // the window is exhausted AND the simplex's energies agree to
        // f_tol scale, the standard simplex flatness check.
        let f_spread = vertices
            .iter()
            .map(|(_, e)| *e)
            .fold(f64::NEG_INFINITY, f64::max)
            - vertices
                .iter()
                .map(|(_, e)| *e)
                .fold(f64::INFINITY, f64::min);
        let flat = f_spread <= f_tol.max(1e-12 * (1.0 + harness.best_energy.abs()));
        if gate.step(harness.best_energy) && flat {
            return Ok(RunOutcome {
                converged: true,
                stop_reason: StopReason::Tolerance,
            });
        }
    }
}

fn run_spsa(
    harness: &mut Harness,
    theta0: Vec<f64>,
    f_tol: f64,
    seed: u64,
    restart: u64,
) -> Result<RunOutcome> {
    const PERTURBATION: f64 = 0.1;
    let n = theta0.len();
    let expected_steps = (harness.max_iters / 2).max(1) as f64;
    let stability = (0.1 * expected_steps).max(1.0);
    let gain = 0.15 * (stability + 1.0).powf(0.602);

    let mut theta = theta0;
    let mut gate = ProgressGate::new(patience_window(n), f_tol);
    for step in 0u64.. {
        let a_k = gain / ((step + 1) as f64 + stability).powf(0.602);
        let c_k = PERTURBATION / ((step + 1) as f64).powf(0.101);
        let mut rng = StdRng::seed_from_u64(derive_seed(
            derive_seed(seed, 0x5B5A_0000_0000_0000 | restart),
            step,
        ));
        let delta: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c_k * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c_k * d).collect();
        let f_plus = match harness.evaluate(&plus)? {
            Some(e) => e,
            None => {
                return Ok(RunOutcome {
                    converged: false,
                    stop_reason: StopReason::MaxIters,
                })
            }
        };
        let f_minus = match harness.evaluate(&minus)? {
            Some(e) => e,
            None => {
                return Ok(RunOutcome {
                    converged: false,
                    stop_reason: StopReason::MaxIters,
                })
            }
        };
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= a_k * (f_plus - f_minus) / (2.0 * c_k * d);
        }
        if gate.step(harness.best_energy) {
            return Ok(RunOutcome {
                converged: true,
                stop_reason: StopReason::Tolerance,
            });
        }
    }
    unreachable!("the step loop only exits through a stop condition");
}

/// Minimize Σⱼ αⱼ⟨ψ(θ)|Gⱼ|ψ(θ)⟩ over θ for the ansatz state
/// ψ(θ) = U(θ)|0ⁿ⟩. Starting points are θ = 0 plus a seed-derived uniform
/// perturbation in [−0.1, 0.1] per parameter; every restart draws a fresh
/// one. The returned trace concatenates all restarts' evaluations; its
/// best point is the global minimum seen, and the stop reason is the one
/// from the restart that produced it.
pub fn optimize(
    terms: &WeightedTermList<SelfInverseTerm>,
    ansatz: &AnsatzCircuit,
    config: &VqeConfig,
) -> Result<OptimizationTrace> {
    if terms.terms.is_empty() {
        return Err(Error::BadInput("no terms to optimize over".into()));
    }
    if ansatz.parameter_count() == 0 {
        return Err(Error::BadInput(
            "ansatz has no parameters to optimize".into(),
        ));
    }
    if config.max_iters == 0 {
        return Err(Error::BadInput("evaluation budget must be positive".into()));
    }
    if config.restarts == 0 {
        return Err(Error::BadInput("at least one start is required".into()));
    }
    if !config.f_tol.is_finite() || config.f_tol < 0.0 {
        return Err(Error::InvalidTolerance(config.f_tol));
    }
    let plan = match config.budget {
        ShotBudget::Exact => None,
        ShotBudget::PerTerm(shots) => {
            if shots == 0 {
                return Err(Error::BadInput("shots per term must be positive".into()));
            }
            Some(ShotPlan {
                total_epsilon: f64::NAN,
                per_term: (0..terms.terms.len())
                    .map(|j| ShotAllocation {
                        term_id: j,
                        part: Part::Re,
                        shots,
                    })
                    .collect(),
            })
        }
        ShotBudget::Epsilon(epsilon) => {
            let coefficients: Vec<f64> = terms.terms.iter().map(|w| w.coefficient).collect();
            Some(allocate_shots(
                &coefficients,
                epsilon,
                PartSelection::ReOnly,
            )?)
        }
    };

    let mut harness = Harness {
        terms,
        ansatz,
        plan,
        mode: config.mode,
        seed: config.seed,
        max_iters: config.max_iters,
        counter: QueryCounter::new(),
        trace: Vec::new(),
        cumulative_shots: 0,
        best_energy: f64::INFINITY,
        best_theta: Vec::new(),
        budget_exhausted: false,
    };

    let mut best_outcome: Option<(f64, RunOutcome)> = None;
    for restart in 0..config.restarts {
        let mut init_rng = StdRng::seed_from_u64(derive_seed(
            derive_seed(config.seed, 0xA5A5_0000_0000_0000),
            restart,
        ));
        let theta0: Vec<f64> = (0..ansatz.parameter_count())
            .map(|_| init_rng.gen_range(-0.1..=0.1))
            .collect();
        let outcome = match config.optimizer {
            OptimizerKind::Simplex => run_simplex(&mut harness, theta0, config.f_tol)?,
            OptimizerKind::Spsa => {
                run_spsa(&mut harness, theta0, config.f_tol, config.seed, restart)?
            }
        };
        let replace = match &best_outcome {
            None => true,
            Some((recorded_best, _)) => harness.best_energy < *recorded_best,
        };
        if replace {
            best_outcome = Some((harness.best_energy, outcome));
        }
        if harness.budget_exhausted {
            break;
        }
    }

    let (_, outcome) = best_outcome.expect("at least one restart ran");
    if harness.trace.is_empty() {
        return Err(Error::BadInput(
            "evaluation budget too small for a single evaluation".into(),
        ));
    }
    Ok(OptimizationTrace {
        best_theta: harness.best_theta.clone(),
        best_energy: harness.best_energy,
        converged: outcome.converged,
        stop_reason: outcome.stop_reason,
        query_counts: harness.counter.snapshot(),
        iterations: harness.trace,
    })
}
