//! The backward recursion: scaling and splitting steps and the driver loop.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::brs::pre::{cut_polytope, pre_xu, project_x};
use crate::brs::split::{farthest_point_sample, select_split_generator, split};
use crate::dynamics::{lagrange_remainder_box, linearize, LinErrorBox, Linearization, ModelRef};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sets::{ConstrainedZonotope, Hyperbox, SafeSet, Zonotope};

pub const DEFAULT_ALPHA: f64 = 1.1;
pub const DEFAULT_MAX_SCALE_ITERS: usize = 30;
pub const DEFAULT_MAX_SPLIT_DEPTH: usize = 12;
/// Slack for comparing two remainder boxes.
const BOX_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Scaling,
    Splitting,
}

#[derive(Clone, Debug)]
pub struct ReachProblem {
    pub model: ModelRef,
    pub target: ConstrainedZonotope,
    pub inputs: ConstrainedZonotope,
    pub disturbance: Zonotope,
    pub safe: SafeSet,
    pub horizon: usize,
    pub method: Method,
    pub alpha: f64,
    /// Admissible linearization error per state (splitting only).
    pub l_bar: DVector<f64>,
    pub max_branches: usize,
    pub max_scale_iters: usize,
    pub max_split_depth: usize,
}

impl ReachProblem {
    /// A problem with default tuning; `l_bar` starts at zero.
    pub fn new(
        model: ModelRef,
        target: ConstrainedZonotope,
        inputs: ConstrainedZonotope,
        disturbance: Zonotope,
        safe: SafeSet,
        horizon: usize,
        method: Method,
    ) -> Self {
        let n = model.state_dim();
        ReachProblem {
            model,
            target,
            inputs,
            disturbance,
            safe,
            horizon,
            method,
            alpha: DEFAULT_ALPHA,
            l_bar: DVector::zeros(n),
            max_branches: 64,
            max_scale_iters: DEFAULT_MAX_SCALE_ITERS,
            max_split_depth: DEFAULT_MAX_SPLIT_DEPTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.model.state_dim();
        let q = self.model.input_dim();
        let check = |what: &str, got: usize, want: usize| -> Result<()> {
            if got == want {
                Ok(())
            } else {
                Err(Error::dim(format!("{what} has dimension {got}, the model expects {want}")))
            }
        };
        check("target", self.target.dim(), n)?;
        check("input set", self.inputs.dim(), q)?;
        check("disturbance", self.disturbance.dim(), n)?;
        check("safe set", self.safe.dim(), n)?;
        check("admissible error bound", self.l_bar.len(), n)?;
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if self.l_bar.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("admissible error bound must be finite and nonnegative".into()));
        }
        if self.max_branches == 0 || self.max_scale_iters == 0 {
            return Err(Error::InvalidInput("branch and iteration budgets must be positive".into()));
        }
        if self.method == Method::Scaling && self.safe.pieces().len() != 1 {
            return Err(Error::InvalidInput("the scaling method needs a single convex safe set; use splitting".into()));
        }
        if self.target.is_empty()? {
            return Err(Error::EmptySet("target set is empty".into()));
        }
        if self.inputs.is_empty()? {
            return Err(Error::EmptySet("input set is empty".into()));
        }
        Ok(())
    }
}

/// How a stored set was obtained.
#[derive(Clone, Debug)]
pub struct PieceRecord {
    /// Index of the previous-step set this piece steers into.
    pub parent: usize,
    /// The (possibly split) part of the parent that was actually targeted.
    pub source: ConstrainedZonotope,
    pub linearization: Linearization,
    /// Error set assumed when subtracting.
    pub assumed: LinErrorBox,
    /// Remainder enclosure over `lifted` at exit; contained in `assumed`.
    pub observed: LinErrorBox,
    /// State-input set the piece was projected from.
    pub lifted: ConstrainedZonotope,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub pieces: usize,
    pub scale_iterations: usize,
    pub splits: usize,
    pub pruned_empty: usize,
    pub depth_capped: usize,
    pub sampled_away: usize,
    pub generators: Vec<usize>,
    pub constraints: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    EmptySet,
    BranchBudgetExhausted,
    ScaleIterExceeded,
}

#[derive(Clone, Debug)]
pub struct ReachResult {
    /// `steps[0]` is the target; every stored set is nonempty.
    pub steps: Vec<Vec<ConstrainedZonotope>>,
    /// Parallel to `steps`; empty for step 0.
    pub records: Vec<Vec<PieceRecord>>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub termination: Termination,
}

impl ReachResult {
    pub fn last(&self) -> &[ConstrainedZonotope] {
        self.steps.last().expect("target is always stored")
    }
}

/// Sets produced by one step together with their provenance.
#[derive(Clone, Debug, Default)]
pub struct StepOutput {
    pub sets: Vec<ConstrainedZonotope>,
    pub records: Vec<PieceRecord>,
    pub diagnostics: StepDiagnostics,
    pub failure: Option<Termination>,
}

fn stacked_box(x: &Hyperbox, u: &Hyperbox) -> Result<Hyperbox> {
    Hyperbox::new(linalg::vcat_vec(x.lower(), u.lower()), linalg::vcat_vec(x.upper(), u.upper()))
}

/// One step of the scaling method: grow the assumed error set by `alpha`
/// until it covers the remainder over the resulting state-input set.
pub fn scaling_brs_step(xprev: &ConstrainedZonotope, p: &ReachProblem) -> Result<StepOutput> {
    let model = p.model.as_ref();
    let n = model.state_dim();
    let mut out = StepOutput::default();
    let ubox = p.inputs.interval_closure()?;
    let z_tilde = stacked_box(&xprev.interval_closure()?, &ubox)?.center();
    let lin0 = linearize(model, &z_tilde)?;
    let safe = Some(&p.safe);

    let (lin, assumed, lifted, observed) = if model.is_linear() {
        // Zero remainder: the preliminary and final sets coincide.
        let z = pre_xu(xprev, &lin0.a, &lin0.b, &p.inputs, &p.disturbance, &Zonotope::point(lin0.offset.clone()), safe)?;
        if z.is_empty()? {
            out.diagnostics.pruned_empty = 1;
            return Ok(out);
        }
        let le = LinErrorBox { bounds: Hyperbox::point(&lin0.offset) };
        (lin0, le.clone(), z, le)
    } else {
        let z_pre = pre_xu(xprev, &lin0.a, &lin0.b, &p.inputs, &p.disturbance, &Zonotope::point(lin0.offset.clone()), safe)?;
        if z_pre.is_empty()? {
            out.diagnostics.pruned_empty = 1;
            return Ok(out);
        }
        let pre_box = z_pre.interval_closure()?;
        let lin = linearize(model, &pre_box.center())?;
        let mut assumed = lagrange_remainder_box(model, &lin, &pre_box)?;
        loop {
            let z = pre_xu(xprev, &lin.a, &lin.b, &p.inputs, &p.disturbance, &assumed.to_zonotope(), safe)?;
            if z.is_empty()? {
                out.diagnostics.pruned_empty = 1;
                return Ok(out);
            }
            let observed = lagrange_remainder_box(model, &lin, &z.interval_closure()?)?;
            if assumed.contains(&observed, BOX_TOL) {
                break (lin, assumed, z, observed);
            }
            out.diagnostics.scale_iterations += 1;
            if out.diagnostics.scale_iterations > p.max_scale_iters {
                out.failure = Some(Termination::ScaleIterExceeded);
                return Ok(out);
            }
            assumed = assumed.enlarged(p.alpha);
        }
    };
    let x = project_x(&lifted, n)?;
    out.sets.push(x);
    out.records.push(PieceRecord { parent: 0, source: xprev.clone(), linearization: lin, assumed, observed, lifted });
    Ok(out)
}

struct SplitWork<'a> {
    p: &'a ReachProblem,
    ubox: Hyperbox,
    out: StepOutput,
}

impl SplitWork<'_> {
    fn process(&mut self, piece: &ConstrainedZonotope, parent: usize, depth: usize) -> Result<()> {
        let model = self.p.model.as_ref();
        let n = model.state_dim();
        let z_star = stacked_box(&piece.interval_closure()?, &self.ubox)?.center();
        let lin = linearize(model, &z_star)?;
        let assumed = LinErrorBox::from_center(&lin.offset, &self.p.l_bar)?;
        let lifted = pre_xu(piece, &lin.a, &lin.b, &self.p.inputs, &self.p.disturbance, &assumed.to_zonotope(), None)?;
        if lifted.is_empty()? {
            self.out.diagnostics.pruned_empty += 1;
            return Ok(());
        }
        let observed = lagrange_remainder_box(model, &lin, &lifted.interval_closure()?)?;
        if assumed.contains(&observed, BOX_TOL) {
            let x = project_x(&lifted, n)?;
            let mut emitted = false;
            for hp in self.p.safe.pieces() {
                let Some(s) = cut_polytope(&x, hp)? else {
                    continue;
                };
                let inside = s.num_constraints() == x.num_constraints();
                if !inside && s.is_empty()? {
                    continue;
                }
                self.out.sets.push(s);
                self.out.records.push(PieceRecord {
                    parent,
                    source: piece.clone(),
                    linearization: lin.clone(),
                    assumed: assumed.clone(),
                    observed: observed.clone(),
                    lifted: lifted.clone(),
                });
                emitted = true;
                if inside {
                    // x lies in this safe piece; other pieces only give subsets.
                    break;
                }
            }
            if !emitted {
                self.out.diagnostics.pruned_empty += 1;
            }
            return Ok(());
        }
        if depth >= self.p.max_split_depth {
            self.out.diagnostics.depth_capped += 1;
            return Ok(());
        }
        let j = select_split_generator(piece, model, &self.p.inputs, &self.p.l_bar)?;
        let (c1, c2) = split(piece, j)?;
        self.out.diagnostics.splits += 1;
        for child in [c1, c2] {
            if child.is_empty()? {
                self.out.diagnostics.pruned_empty += 1;
            } else {
                self.process(&child, parent, depth + 1)?;
            }
        }
        Ok(())
    }
}

/// One step of the splitting method over a collection of sets. Output order:
/// by input index, then recursion order (first child before second).
pub fn splitting_brs_step(prev: &[ConstrainedZonotope], p: &ReachProblem) -> Result<StepOutput> {
    let mut work = SplitWork { p, ubox: p.inputs.interval_closure()?, out: StepOutput::default() };
    for (i, piece) in prev.iter().enumerate() {
        work.process(piece, i, 0)?;
    }
    let mut out = work.out;
    if out.sets.len() > p.max_branches {
        let keep = farthest_point_sample(&out.sets, p.max_branches)?;
        out.diagnostics.sampled_away = out.sets.len() - keep.len();
        out.sets = keep.iter().map(|&i| out.sets[i].clone()).collect();
        out.records = keep.iter().map(|&i| out.records[i].clone()).collect();
    }
    if out.sets.is_empty() && out.diagnostics.depth_capped > 0 {
        out.failure = Some(Termination::BranchBudgetExhausted);
    }
    Ok(out)
}

/// Iterates the chosen step from the target for up to `horizon` steps.
pub fn run(p: &ReachProblem) -> Result<ReachResult> {
    p.validate()?;
    let mut result = ReachResult {
        steps: vec![vec![p.target.clone()]],
        records: vec![Vec::new()],
        diagnostics: vec![StepDiagnostics {
            step: 0,
            pieces: 1,
            generators: vec![p.target.num_generators()],
            constraints: vec![p.target.num_constraints()],
            ..Default::default()
        }],
        termination: Termination::HorizonReached,
    };
    for k in 1..=p.horizon {
        let prev = result.last();
        let mut out = match p.method {
            Method::Scaling => scaling_brs_step(&prev[0], p)?,
            Method::Splitting => splitting_brs_step(prev, p)?,
        };
        out.diagnostics.step = k;
        out.diagnostics.pieces = out.sets.len();
        out.diagnostics.generators = out.sets.iter().map(ConstrainedZonotope::num_generators).collect();
        out.diagnostics.constraints = out.sets.iter().map(ConstrainedZonotope::num_constraints).collect();
        result.diagnostics.push(out.diagnostics);
        if let Some(t) = out.failure {
            result.termination = t;
            break;
        }
        if out.sets.is_empty() {
            result.termination = Termination::EmptySet;
            break;
        }
        result.steps.push(out.sets);
        result.records.push(out.records);
    }
    Ok(result)
}
