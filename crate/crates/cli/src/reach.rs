use std::sync::Arc;

use czreach::brs::{run, ReachProblem, StepDiagnostics, Termination};
use czreach::dynamics::models::BUILTIN_NAMES;
use czreach::dynamics::{builtin, LinearModel, ModelRef};
use czreach::sets::{ConstrainedZonotope, Sampler};
use czreach::validation::{bounding_box_volume, union_volume, DEFAULT_VOLUME_SAMPLES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{self, ReachConfig};
use crate::failure::Failure;
use crate::output::{self, Layer, OutDir};
use crate::Common;

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub step: usize,
    pub sets: Vec<ConstrainedZonotope>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsDoc {
    pub termination: Termination,
    pub steps: Vec<StepDoc>,
}

#[derive(Serialize)]
struct DiagDoc<'a> {
    termination: Termination,
    steps: &'a [StepDiagnostics],
}

#[derive(Serialize)]
struct VolumeDoc {
    value: f64,
    stderr: f64,
    samples: usize,
    seed: u64,
}

#[derive(Serialize)]
struct ReportDoc {
    model: String,
    method: czreach::brs::Method,
    horizon: usize,
    seed: u64,
    termination: Termination,
    steps_computed: usize,
    pieces_per_step: Vec<usize>,
    final_bounding_box_volume: f64,
    final_volume: Option<VolumeDoc>,
}

fn model(cfg: &ReachConfig) -> Result<ModelRef, Failure> {
    match (&cfg.model, &cfg.linear) {
        (Some(name), None) => builtin(name).ok_or_else(|| {
            Failure::schema("model", format!("unknown model {name:?}; builtins are {}", BUILTIN_NAMES.join(", ")))
        }),
        (None, Some(lin)) => {
            let a = config::matrix(&lin.a, None, "linear.A")?;
            if a.nrows() != a.ncols() {
                return Err(Failure::schema("linear.A", format!("must be square, got {}×{}", a.nrows(), a.ncols())));
            }
            let b = config::matrix(&lin.b, None, "linear.B")?;
            if b.nrows() != a.nrows() {
                return Err(Failure::schema("linear.B", format!("has {} rows, A has {}", b.nrows(), a.nrows())));
            }
            let m = LinearModel::new("linear", a, b).map_err(|e| Failure::schema("linear", e.to_string()))?;
            Ok(Arc::new(m))
        }
        _ => Err(Failure::schema("model", "give exactly one of `model` (builtin name) or `linear` ({A, B})")),
    }
}

pub fn problem(cfg: &ReachConfig) -> Result<ReachProblem, Failure> {
    let model = model(cfg)?;
    let (n, q) = (model.state_dim(), model.input_dim());
    let dim = |what: &str, got: usize, want: usize| {
        if got == want {
            Ok(())
        } else {
            Err(Failure::schema(what, format!("has dimension {got}, the model expects {want}")))
        }
    };
    let target = cfg.target.literal("target")?.to_cz();
    dim("target", target.dim(), n)?;
    let inputs = cfg.inputs.literal("inputs")?.to_cz();
    dim("inputs", inputs.dim(), q)?;
    let disturbance = cfg.disturbance.zonotope("disturbance")?;
    dim("disturbance", disturbance.dim(), n)?;
    let safe = config::safe_set(cfg.safe.as_deref(), n)?;

    let mut p = ReachProblem::new(model, target, inputs, disturbance, safe, cfg.horizon, cfg.method);
    if let Some(a) = cfg.alpha {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Failure::schema("alpha", format!("must be a finite number above 1, got {a}")));
        }
        p.alpha = a;
    }
    if let Some(l) = &cfg.l_bar {
        p.l_bar = config::vector(l, Some(n), "l_bar")?;
        if let Some(i) = p.l_bar.iter().position(|v| *v < 0.0) {
            return Err(Failure::schema(format!("l_bar[{i}]"), "must be nonnegative"));
        }
    }
    let positive = |v: Option<usize>, path: &str, slot: &mut usize| {
        match v {
            Some(0) => return Err(Failure::schema(path, "must be positive")),
            Some(k) => *slot = k,
            None => {}
        }
        Ok(())
    };
    positive(cfg.max_branches, "max_branches", &mut p.max_branches)?;
    positive(cfg.max_scale_iters, "max_scale_iters", &mut p.max_scale_iters)?;
    if let Some(d) = cfg.max_split_depth {
        p.max_split_depth = d;
    }
    p.validate().map_err(|e| Failure::schema("", e.to_string()))?;
    Ok(p)
}

pub fn cmd(common: &Common) -> Result<(), Failure> {
    let cfg: ReachConfig = config::load(common.config_path()?)?;
    let p = problem(&cfg)?;
    let n = p.model.state_dim();
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let emit_svg = common.svg || cfg.emit_svg;
    let axes = if emit_svg { Some(config::axes(cfg.plot_axes, n, "plot_axes")?) } else { None };
    let min_volume = 1000;
    let volume_samples = match cfg.volume_samples {
        Some(0) => 0,
        Some(k) if k < min_volume => {
            return Err(Failure::schema("volume_samples", format!("use 0 to skip or at least {min_volume}")))
        }
        Some(k) => k,
        None if n == 2 => DEFAULT_VOLUME_SAMPLES,
        None => 0,
    };
    let out = OutDir::create(&crate::out_dir(common, cfg.out.as_deref()))?;

    let r = run(&p)?;

    let steps = StepsDoc {
        termination: r.termination,
        steps: r.steps.iter().enumerate().map(|(k, s)| StepDoc { step: k, sets: s.clone() }).collect(),
    };
    out.json("steps.json", &steps)?;
    out.json("diag.json", &DiagDoc { termination: r.termination, steps: &r.diagnostics })?;

    // Spread the per-step budget over the pieces, in stored order.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut layers = Vec::new();
    for (k, sets) in r.steps.iter().enumerate() {
        let per = cfg.samples_per_step.div_ceil(sets.len().max(1));
        let mut layer = Layer {
            label: format!("step{k}"),
            color: if k == 0 {
                "#d62728".into()
            } else {
                output::ramp(k as f64 / (r.steps.len() - 1).max(1) as f64)
            },
            rects: Vec::new(),
            points: Vec::new(),
        };
        for (i, s) in sets.iter().enumerate() {
            let pts = Sampler::new(s)?.points(per, &mut rng);
            if axes.is_some() {
                layer.rects.push(s.interval_closure()?);
                layer.points.extend(pts.iter().cloned());
            }
            rows.extend(pts.into_iter().map(|x| (vec![k, i], x)));
        }
        layers.push(layer);
    }
    out.write("points.csv", &output::points_csv(&["step", "piece"], n, &rows))?;
    if let Some((i, j)) = axes {
        // Target last so it stays visible.
        layers.rotate_left(1);
        out.write(&format!("plot_{}_{}.svg", i + 1, j + 1), &output::svg(&layers, i, j))?;
    }

    let last = r.last();
    let final_volume = if volume_samples > 0 {
        let v = union_volume(last, volume_samples, seed)?;
        Some(VolumeDoc { value: v.value, stderr: v.stderr, samples: v.samples, seed })
    } else {
        None
    };
    let report = ReportDoc {
        model: p.model.name().to_string(),
        method: p.method,
        horizon: p.horizon,
        seed,
        termination: r.termination,
        steps_computed: r.steps.len() - 1,
        pieces_per_step: r.steps.iter().map(Vec::len).collect(),
        final_bounding_box_volume: bounding_box_volume(last)?,
        final_volume,
    };
    out.json("report.json", &report)?;
    println!(
        "{:?} after {} of {} steps; {} piece(s) at the last step",
        r.termination,
        r.steps.len() - 1,
        p.horizon,
        last.len()
    );
    Ok(())
}
