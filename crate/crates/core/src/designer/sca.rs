use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::instance::{DesignInstance, LabelTable};
use super::qp::{min_norm_point, HalfspaceOracle, QpOptions, QpStatus, Violation};
use crate::algebra::superimpose;
use crate::codebook::check_set;
use crate::math::{dot, norm_sq, sqrt};
use crate::symmetric::SymmetricProfile;
use crate::{Codebook, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `‖r* − r₀‖` falls below this.
    pub step_threshold: f64,
    pub max_outer_iterations: usize,
    pub subproblem_feasibility_tol: f64,
    pub subproblem_relative_optimality_tol: f64,
    pub seed: u64,
    /// Initial points are scaled to a minimum distance of `1 + init_margin`.
    pub init_margin: f64,
    /// Halfspaces added per cutting-plane round.
    pub cut_batch: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            step_threshold: 0.01,
            max_outer_iterations: 50,
            subproblem_feasibility_tol: 1e-8,
            subproblem_relative_optimality_tol: 1e-6,
            seed: 0,
            init_margin: 1e-3,
            cut_batch: 64,
        }
    }
}

impl SolverOptions {
    fn check(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step_threshold)
            || !positive(self.subproblem_feasibility_tol)
            || !positive(self.subproblem_relative_optimality_tol)
        {
            return Err(Error::InvalidOption("solver thresholds must be positive"));
        }
        if !(self.init_margin.is_finite() && self.init_margin >= 0.0) {
            return Err(Error::InvalidOption("initialization margin must be nonnegative"));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidOption("at least one outer iteration is required"));
        }
        Ok(())
    }

    fn qp(&self) -> QpOptions {
        QpOptions {
            // Cut well inside the feasibility target so later linearization points stay feasible.
            tolerance: self.subproblem_feasibility_tol * 1e-3,
            batch: self.cut_batch,
            ..QpOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Init,
    Solved(QpStatus),
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepStatus::Init => "init",
            StepStatus::Solved(QpStatus::Optimal) => "optimal",
            StepStatus::Solved(QpStatus::Infeasible) => "infeasible",
            StepStatus::Solved(QpStatus::IterationLimit) => "iteration_limit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `‖r‖²` after this iteration.
    pub objective: f64,
    /// `‖r* − r₀‖`; zero for the initial point.
    pub step_norm: f64,
    pub status: StepStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    StepThreshold,
    MaxIterations,
    SolverFailure,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::StepThreshold => "step_threshold",
            StopReason::MaxIterations => "max_iterations",
            StopReason::SolverFailure => "solver_failure",
        })
    }
}

/// Per-iteration record of the outer loop. Entry 0 is the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub entries: Vec<TraceEntry>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl ConvergenceTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.objective).collect()
    }

    /// Number of subproblems solved.
    pub fn outer_iterations(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn final_step(&self) -> Option<f64> {
        self.entries.iter().skip(1).last().map(|e| e.step_norm)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.entries.windows(2).all(|w| w[1].objective <= w[0].objective + slack)
    }

    /// CSV with header `iter,objective,step_norm,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,step_norm,status\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{:e},{:e},{}", e.iteration, e.objective, e.step_norm, e.status);
        }
        out
    }
}

/// Scales `r` so the smallest constraint value becomes `(1 + margin)²`.
pub fn scale_to_feasible(instance: &DesignInstance, r: &[f64], margin: f64) -> Result<Vec<f64>> {
    let q = instance.min_quadratic(r);
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InfeasiblePoint(q));
    }
    let factor = (1.0 + margin) / sqrt(q);
    Ok(r.iter().map(|v| v * factor).collect())
}

/// Random feasible starting point: standard normal entries (magnitudes for the
/// symmetric scheme), scaled to minimum distance `1 + margin`.
pub fn initialize(instance: &DesignInstance, seed: u64, margin: f64) -> Result<Vec<f64>> {
    const ATTEMPTS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let r: Vec<f64> = (0..instance.num_variables())
            .map(|_| {
                let v: f64 = StandardNormal.sample(&mut rng);
                if instance.nonnegative() {
                    v.abs()
                } else {
                    v
                }
            })
            .collect();
        if let Ok(r0) = scale_to_feasible(instance, &r, margin) {
            return Ok(r0);
        }
    }
    Err(Error::DegenerateInitialization(ATTEMPTS))
}

/// The convex program obtained by linearizing every distance constraint at `r₀`:
/// minimize `‖r‖²` subject to `2 (A_c r₀)ᵀ (A_c r) ≥ 1 + ‖A_c r₀‖²`, plus `r ≥ 0`
/// for symmetric magnitudes.
pub struct Subproblem<'a> {
    instance: &'a DesignInstance,
    r0: Vec<f64>,
    base: LabelTable,
    space: u64,
}

/// Linearizes at `r0`, which must satisfy every constraint to within `tol`.
pub fn linearize<'a>(instance: &'a DesignInstance, r0: &[f64], tol: f64) -> Result<Subproblem<'a>> {
    if r0.len() != instance.num_variables() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "design vector has {} entries, expected {}",
            r0.len(),
            instance.num_variables()
        )));
    }
    let q = instance.min_quadratic(r0);
    if !(q >= 1.0 - tol) {
        return Err(Error::InfeasiblePoint(q));
    }
    if instance.nonnegative() && r0.iter().any(|&v| v < 0.0) {
        return Err(Error::InfeasiblePoint(q));
    }
    Ok(Subproblem {
        instance,
        r0: r0.to_vec(),
        base: instance.label_table(r0),
        space: instance.id_space(),
    })
}

impl Subproblem<'_> {
    pub fn r0(&self) -> &[f64] {
        &self.r0
    }

    /// Normal and right-hand side of the linearized constraint with these labels.
    pub fn constraint(&self, labels: &[u16]) -> (Vec<f64>, f64) {
        let v = self.instance.constraint_image(labels, &self.r0);
        let mut normal = vec![0.0; self.instance.num_variables()];
        for (j, &p) in labels.iter().enumerate() {
            for t in &self.instance.map(j, usize::from(p)).terms {
                normal[t.var] += 2.0 * t.coef * v[t.resource];
            }
        }
        (normal, 1.0 + norm_sq(&v))
    }

    /// Smallest slack over all linearized constraints at `x`.
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        let wt = self.instance.label_table(x);
        let k = self.instance.graph().resources();
        let mut min = f64::INFINITY;
        self.instance.scan(&[&self.base, &wt], |_, s| {
            let (v, w) = s.split_at(k);
            min = min.min(2.0 * dot(v, w) - 1.0 - norm_sq(v));
        });
        if self.instance.nonnegative() {
            min = x.iter().fold(min, |m, &v| m.min(v));
        }
        min
    }
}

impl HalfspaceOracle for Subproblem<'_> {
    fn dim(&self) -> usize {
        self.instance.num_variables()
    }

    fn violations(&self, x: &[f64], tol: f64, out: &mut Vec<Violation>) {
        let wt = self.instance.label_table(x);
        let k = self.instance.graph().resources();
        self.instance.scan(&[&self.base, &wt], |labels, s| {
            let (v, w) = s.split_at(k);
            let slack = 2.0 * dot(v, w) - 1.0 - norm_sq(v);
            if slack < -tol {
                let mut g = 0.0;
                for (j, &p) in labels.iter().enumerate() {
                    for t in &self.instance.map(j, usize::from(p)).terms {
                        let c = t.coef * v[t.resource];
                        g += c * c;
                    }
                }
                let norm = 2.0 * sqrt(g);
                out.push(Violation {
                    id: self.instance.constraint_id(labels),
                    score: slack / norm.max(f64::MIN_POSITIVE),
                });
            }
        });
        if self.instance.nonnegative() {
            for (i, &v) in x.iter().enumerate() {
                if v < -tol {
                    out.push(Violation { id: self.space + i as u64, score: v });
                }
            }
        }
    }

    fn halfspace(&self, id: u64, normal: &mut [f64]) -> f64 {
        if id >= self.space {
            normal.fill(0.0);
            normal[(id - self.space) as usize] = 1.0;
            return 0.0;
        }
        let (a, b) = self.constraint(&self.instance.constraint_labels(id));
        normal.copy_from_slice(&a);
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub r: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
    /// Constraint ids active at the solution; a warm start for the next subproblem.
    pub active: Vec<u64>,
}

pub fn solve_subproblem(sub: &Subproblem<'_>, warm: &[u64], options: &SolverOptions) -> SubproblemSolution {
    let sol = min_norm_point(sub, warm, &options.qp());
    let mut r = sol.x;
    if sub.instance.nonnegative() {
        // Bounds are met to within the cut tolerance; snap the residue.
        for v in r.iter_mut().filter(|v| **v < 0.0) {
            *v = 0.0;
        }
    }
    SubproblemSolution { objective: norm_sq(&r), r, status: sol.status, active: sol.active }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub r: Vec<f64>,
    pub codebooks: Vec<Codebook>,
    /// Symmetric magnitudes and signs; `None` for the other schemes.
    pub profiles: Option<Vec<SymmetricProfile>>,
    pub trace: ConvergenceTrace,
}

/// Runs the outer loop from a random feasible point.
pub fn design(instance: &DesignInstance, options: &SolverOptions) -> Result<DesignOutcome> {
    options.check()?;
    let r0 = initialize(instance, options.seed, options.init_margin)?;
    design_from(instance, &r0, options)
}

/// Runs the outer loop from a given feasible point.
pub fn design_from(instance: &DesignInstance, r0: &[f64], options: &SolverOptions) -> Result<DesignOutcome> {
    options.check()?;
    linearize(instance, r0, options.subproblem_feasibility_tol)?;
    let mut r = r0.to_vec();
    let mut entries = vec![TraceEntry { iteration: 0, objective: norm_sq(&r), step_norm: 0.0, status: StepStatus::Init }];
    let mut warm: Vec<u64> = Vec::new();
    let mut stop = StopReason::MaxIterations;
    let gate = options.subproblem_feasibility_tol;
    for iteration in 1..=options.max_outer_iterations {
        let sub = linearize(instance, &r, gate)?;
        let sol = solve_subproblem(&sub, &warm, options);
        if sol.status != QpStatus::Optimal {
            entries.push(TraceEntry {
                iteration,
                objective: norm_sq(&r),
                step_norm: 0.0,
                status: StepStatus::Solved(sol.status),
            });
            stop = StopReason::SolverFailure;
            break;
        }
        let step = sqrt(r.iter().zip(&sol.r).map(|(a, b)| (a - b) * (a - b)).sum());
        entries.push(TraceEntry {
            iteration,
            objective: sol.objective,
            step_norm: step,
            status: StepStatus::Solved(QpStatus::Optimal),
        });
        r = sol.r;
        warm = sol.active;
        if step < options.step_threshold {
            stop = StopReason::StepThreshold;
            break;
        }
    }
    let trace = ConvergenceTrace { entries, converged: stop == StopReason::StepThreshold, stop_reason: stop };
    let codebooks = instance.codebooks(&r)?;
    if let Some(cb) = codebooks.iter().find(|cb| !cb.has_distinct_codewords(0.0)) {
        return Err(Error::DegenerateCodebook { user: cb.user() });
    }
    let profiles = match instance.scheme() {
        crate::Scheme::Symmetric => Some(instance.profiles(&r)?),
        _ => None,
    };
    Ok(DesignOutcome { r, codebooks, profiles, trace })
}

/// Default cap on superimposed columns for [`med`].
pub const MED_COLUMN_CAP: u128 = 1 << 16;

/// Minimum Euclidean distance between distinct superimposed codewords, by brute force.
pub fn med(codebooks: &[Codebook]) -> Result<f64> {
    med_with_cap(codebooks, MED_COLUMN_CAP)
}

pub fn med_with_cap(codebooks: &[Codebook], cap: u128) -> Result<f64> {
    let (k, _) = check_set(codebooks)?;
    let s = superimpose(codebooks, cap)?;
    let n = s.cols();
    // Column-major copy for contiguous access.
    let mut cols = vec![0.0; n * k];
    for c in 0..n {
        s.column_into(c, &mut cols[c * k..(c + 1) * k]);
    }
    let mut min = f64::INFINITY;
    for a in 0..n {
        let ca = &cols[a * k..(a + 1) * k];
        for b in a + 1..n {
            let cb = &cols[b * k..(b + 1) * k];
            let mut d = 0.0;
            for i in 0..k {
                let t = ca[i] - cb[i];
                d += t * t;
            }
            if d < min {
                min = d;
            }
        }
    }
    Ok(sqrt(min))
}
