use czreach::acceptance::{soundness_batch, SoundnessStats};
use czreach::linalg::test_directions;
use czreach::minkdiff::{exact_hrep_diff, minkdiff_exact_via_rich, minkdiff_two_step, rich_cgrep, step_two, DiffResult, MinOutSolution};
use czreach::sets::{ConstrainedZonotope, HPolytope, Sampler, Zonotope, MEMBERSHIP_TOL};
use czreach::validation::{brute_force_diff_2d_points, polygon_2d, zonotope_probe_points, Polygon};
use czreach::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{self, MinkdiffConfig, SetLiteral};
use crate::failure::Failure;
use crate::output::{self, Layer, OutDir};
use crate::Common;

/// Probe budget for membership checks above two dimensions.
const MAX_PROBES_ND: usize = 32;

/// Codes of the `kind` column in `points.csv`.
const KIND_SAMPLE: usize = 0;
const KIND_ORACLE: usize = 1;
const KIND_GAP: usize = 2;

enum Minuend {
    Cz(ConstrainedZonotope),
    /// A polytope together with a CZ form of it.
    Poly(HPolytope, ConstrainedZonotope),
}

impl Minuend {
    fn cz(&self) -> &ConstrainedZonotope {
        match self {
            Minuend::Cz(c) | Minuend::Poly(_, c) => c,
        }
    }
}

enum Subtrahend {
    Zono(Zonotope),
    Shrink(MinOutSolution),
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Nonempty,
    Empty,
    NoEnclosure,
}

#[derive(Serialize)]
struct PathDoc {
    status: Status,
    objective: Option<f64>,
}

#[derive(Serialize)]
struct DirectionDoc {
    direction: Vec<f64>,
    two_step: Option<f64>,
    rich: Option<f64>,
    exact: Option<f64>,
    oracle: Option<f64>,
    /// Reference support (exact, else oracle) minus the two-step support.
    gap: Option<f64>,
}

#[derive(Serialize)]
struct OracleDoc {
    resolution: usize,
    probes: usize,
    points: usize,
    /// Oracle points the two-step difference misses.
    gap_points: usize,
}

#[derive(Serialize)]
struct SoundDoc {
    samples: usize,
    probes: usize,
    violations: usize,
}

#[derive(Serialize)]
struct BatchReport {
    #[serde(flatten)]
    stats: SoundnessStats,
    soundness_rate: f64,
}

#[derive(Serialize)]
struct ReportDoc {
    dimension: usize,
    minuend: &'static str,
    subtrahend: &'static str,
    seed: u64,
    two_step: PathDoc,
    rich: Option<PathDoc>,
    exact_empty: Option<bool>,
    max_gap: Option<f64>,
    max_rich_gap: Option<f64>,
    directions: Vec<DirectionDoc>,
    oracle: Option<OracleDoc>,
    soundness: Option<SoundDoc>,
    batch: Option<BatchReport>,
}

fn minuend(cfg: &MinkdiffConfig) -> Result<Option<Minuend>, Failure> {
    match (&cfg.minuend, &cfg.minuend_hrep) {
        (Some(_), Some(_)) => Err(Failure::schema("minuend_hrep", "give either `minuend` or `minuend_hrep`")),
        (Some(doc), None) => Ok(Some(match doc.literal("minuend")? {
            SetLiteral::Box(b) => Minuend::Poly(HPolytope::from_box(&b), b.to_cz()),
            SetLiteral::Cz(c) => Minuend::Cz(c),
        })),
        (None, Some(doc)) => {
            let p = doc.polytope(None, "minuend_hrep")?;
            if p.bounding_box()?.is_none() {
                return Err(Failure::schema("minuend_hrep", "polytope must be nonempty and bounded"));
            }
            let cz = rich_cgrep(&p, &Zonotope::point(DVector::zeros(p.dim())))?;
            Ok(Some(Minuend::Poly(p, cz)))
        }
        (None, None) => Ok(None),
    }
}

fn subtrahend(cfg: &MinkdiffConfig, m: &ConstrainedZonotope) -> Result<Subtrahend, Failure> {
    let n = m.dim();
    match (&cfg.subtrahend, &cfg.sigma_bar) {
        (Some(_), Some(_)) => Err(Failure::schema("sigma_bar", "give either `subtrahend` or `sigma_bar`")),
        (None, None) => Err(Failure::schema("subtrahend", "missing (or give `sigma_bar`)")),
        (Some(doc), None) => {
            if cfg.c_s.is_some() {
                return Err(Failure::schema("c_s", "only meaningful with `sigma_bar`"));
            }
            let z = doc.zonotope("subtrahend")?;
            if z.dim() != n {
                return Err(Failure::schema("subtrahend", format!("has dimension {}, the minuend {n}", z.dim())));
            }
            Ok(Subtrahend::Zono(z))
        }
        (None, Some(s)) => {
            let sigma = config::vector(s, Some(m.num_generators()), "sigma_bar")?;
            if let Some(i) = sigma.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Failure::schema(format!("sigma_bar[{i}]"), "must lie in [0, 1]"));
            }
            let c_s = match &cfg.c_s {
                Some(c) => config::vector(c, Some(n), "c_s")?,
                None => DVector::zeros(n),
            };
            Ok(Subtrahend::Shrink(MinOutSolution {
                gamma: DMatrix::zeros(sigma.len(), 0),
                sigma_bar: sigma,
                c_s,
                b_s: DVector::zeros(m.num_constraints()),
                lp_iterations: 0,
            }))
        }
    }
}

fn directions(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    if n == 2 {
        (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect()
    } else {
        test_directions(n, count, seed)
    }
}

/// Points `v` such that `x ⊕ {v}` over all of them decides `x ⊕ S ⊆ M`
/// exactly (planar) or by sampling (otherwise).
fn probes(sub: &Subtrahend, res: Option<&DiffResult>, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<DVector<f64>>, Failure> {
    match sub {
        Subtrahend::Zono(z) => {
            let k = z.num_generators();
            if n == 2 && k <= 10 {
                return Ok(zonotope_probe_points(z)?);
            }
            if k < 6 {
                return Ok(zonotope_probe_points(z)?.into_iter().take(1 << k).collect());
            }
            Ok((0..MAX_PROBES_ND)
                .map(|_| z.g() * DVector::from_fn(k, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 }) + z.c())
                .collect())
        }
        Subtrahend::Shrink(_) => {
            let Some(res) = res else { return Ok(Vec::new()) };
            if n == 2 {
                Ok(polygon_2d(&res.enclosing)?.vertices().to_vec())
            } else {
                Ok(Sampler::new(&res.enclosing)?.points(MAX_PROBES_ND, rng))
            }
        }
    }
}

fn contains(m: &ConstrainedZonotope, poly: Option<&Polygon>, x: &DVector<f64>) -> Result<bool, Failure> {
    Ok(match poly {
        Some(p) => p.contains(x, MEMBERSHIP_TOL),
        None => m.contains_point_tol(x, MEMBERSHIP_TOL)?,
    })
}

pub fn cmd(common: &Common) -> Result<(), Failure> {
    let cfg: MinkdiffConfig = config::load(common.config_path()?)?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let emit_svg = common.svg || cfg.emit_svg;
    let m = minuend(&cfg)?;
    if m.is_none() && cfg.batch.is_none() {
        return Err(Failure::schema("minuend", "missing (give `minuend`, `minuend_hrep` or `batch`)"));
    }
    let sub = match &m {
        Some(m) => Some(subtrahend(&cfg, m.cz())?),
        None => None,
    };
    let axes = match (&m, emit_svg) {
        (Some(m), true) => Some(config::axes(cfg.plot_axes, m.cz().dim(), "plot_axes")?),
        _ => None,
    };
    if cfg.directions == 0 {
        return Err(Failure::schema("directions", "must be positive"));
    }
    let out = OutDir::create(&crate::out_dir(common, cfg.out.as_deref()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let batch = match &cfg.batch {
        Some(b) => {
            let stats = soundness_batch(&mut rng, b.instances, b.diff_samples, b.sub_samples, b.lp_pairs, 1e-6)?;
            let pairs = stats.witness_pairs + stats.lp_pairs;
            let rate = if pairs == 0 { 1.0 } else { 1.0 - stats.violations as f64 / pairs as f64 };
            println!(
                "batch: {} instances, {} checked, {pairs} pairs, {} violations",
                stats.instances, stats.checked, stats.violations
            );
            Some(BatchReport { stats, soundness_rate: rate })
        }
        None => None,
    };

    let (Some(m), Some(sub)) = (m, sub) else {
        #[derive(Serialize)]
        struct BatchOnly {
            seed: u64,
            batch: Option<BatchReport>,
        }
        return out.json("report.json", &BatchOnly { seed, batch });
    };
    let cz = m.cz();
    let n = cz.dim();

    // Two-step path.
    let two_step = match &sub {
        Subtrahend::Zono(z) => match minkdiff_two_step(cz, z, cfg.ensure_nonempty) {
            Ok(r) => Some(r),
            Err(Error::NoEnclosure) => None,
            Err(e) => return Err(e.into()),
        },
        Subtrahend::Shrink(sol) => Some(step_two(cz, sol)?),
    };
    let two_step_nonempty = match &two_step {
        Some(r) => !r.difference.is_empty()?,
        None => false,
    };
    let two_step_doc = PathDoc {
        status: match (&two_step, two_step_nonempty) {
            (None, _) => Status::NoEnclosure,
            (Some(_), true) => Status::Nonempty,
            (Some(_), false) => Status::Empty,
        },
        objective: two_step.as_ref().map(|r| r.shrink.objective()),
    };

    // Rich-representation and exact paths need a polytope and a zonotope.
    let (rich, exact) = match (&m, &sub) {
        (Minuend::Poly(p, _), Subtrahend::Zono(z)) => (Some(minkdiff_exact_via_rich(p, z)?), Some(exact_hrep_diff(p, z)?)),
        _ => (None, None),
    };
    let exact_empty = match &exact {
        Some(e) => Some(e.is_empty()?),
        None => None,
    };

    // Planar grid oracle.
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let probe_pts = probes(&sub, two_step.as_ref(), n, &mut probe_rng)?;
    let d_poly = if n == 2 && two_step_nonempty {
        Some(polygon_2d(&two_step.as_ref().expect("nonempty").difference)?)
    } else {
        None
    };
    let oracle_pts = if n == 2 && !probe_pts.is_empty() {
        Some(brute_force_diff_2d_points(cz, &probe_pts, cfg.resolution)?)
    } else {
        None
    };
    let gap_flags: Vec<bool> = oracle_pts
        .iter()
        .flatten()
        .map(|x| d_poly.as_ref().is_none_or(|p| !p.contains(x, 1e-9)))
        .collect();

    let mut rows = Vec::new();
    let mut dirs = Vec::new();
    for d in directions(n, cfg.directions, seed) {
        let two = match (&two_step, two_step_nonempty) {
            (Some(r), true) => r.difference.try_support(&d)?,
            _ => None,
        };
        let rich_v = match &rich {
            Some(Some(r)) => r.difference.try_support(&d)?,
            _ => None,
        };
        let exact_v = match (&exact, exact_empty) {
            (Some(e), Some(false)) => e.support(&d)?,
            _ => None,
        };
        let oracle_v = oracle_pts
            .as_ref()
            .and_then(|pts| pts.iter().map(|x| d.dot(x)).max_by(f64::total_cmp));
        let reference = exact_v.or(oracle_v);
        dirs.push(DirectionDoc {
            direction: d.iter().copied().collect(),
            two_step: two,
            rich: rich_v,
            exact: exact_v,
            oracle: oracle_v,
            gap: reference.zip(two).map(|(r, t)| r - t),
        });
    }
    let max_of = |v: Vec<f64>| v.into_iter().max_by(f64::total_cmp);
    let max_gap = max_of(dirs.iter().filter_map(|d| d.gap).collect());
    let max_rich_gap = max_of(dirs.iter().filter_map(|d| Some((d.exact? - d.rich?).abs())).collect());

    // Difference samples must land inside the minuend after every probe.
    let soundness = if two_step_nonempty && !probe_pts.is_empty() {
        let diff = &two_step.as_ref().expect("nonempty").difference;
        let m_poly = if n == 2 { Some(polygon_2d(cz)?) } else { None };
        let samples = Sampler::new(diff)?.points(cfg.samples, &mut rng);
        let mut violations = 0;
        for x in &samples {
            let mut ok = true;
            for v in &probe_pts {
                ok &= contains(cz, m_poly.as_ref(), &(x + v))?;
                if !ok {
                    break;
                }
            }
            violations += usize::from(!ok);
        }
        rows.extend(samples.into_iter().map(|x| (vec![KIND_SAMPLE], x)));
        Some(SoundDoc { samples: cfg.samples, probes: probe_pts.len(), violations })
    } else {
        None
    };
    if let Some(pts) = &oracle_pts {
        for (x, gap) in pts.iter().zip(&gap_flags) {
            rows.push((vec![if *gap { KIND_GAP } else { KIND_ORACLE }], x.clone()));
        }
    }

    if let Some(r) = &two_step {
        out.json("difference.json", r)?;
    }
    if let Some(Some(r)) = &rich {
        out.json("rich.json", r)?;
    }
    if let Some(e) = &exact {
        out.json("exact.json", e)?;
    }
    out.write("points.csv", &output::points_csv(&["kind"], n, &rows))?;
    if let Some((i, j)) = axes {
        let by_kind = |k: usize| rows.iter().filter(|r| r.0[0] == k).map(|r| r.1.clone()).collect::<Vec<_>>();
        let mut layers = vec![
            Layer { label: "minuend".into(), color: "#555555".into(), rects: vec![cz.interval_closure()?], points: Vec::new() },
            Layer { label: "oracle".into(), color: "#bbbbbb".into(), rects: Vec::new(), points: by_kind(KIND_ORACLE) },
            Layer { label: "gap".into(), color: "#ff7f0e".into(), rects: Vec::new(), points: by_kind(KIND_GAP) },
        ];
        let mut diff_layer =
            Layer { label: "difference".into(), color: "#1f77b4".into(), rects: Vec::new(), points: by_kind(KIND_SAMPLE) };
        if two_step_nonempty {
            diff_layer.rects.push(two_step.as_ref().expect("nonempty").difference.interval_closure()?);
        }
        layers.push(diff_layer);
        out.write(&format!("plot_{}_{}.svg", i + 1, j + 1), &output::svg(&layers, i, j))?;
    }

    let report = ReportDoc {
        dimension: n,
        minuend: match m {
            Minuend::Cz(_) => "constrained_zonotope",
            Minuend::Poly(..) => "polytope",
        },
        subtrahend: match sub {
            Subtrahend::Zono(_) => "zonotope",
            Subtrahend::Shrink(_) => "fixed_shrink",
        },
        seed,
        two_step: two_step_doc,
        rich: rich.as_ref().map(|r| PathDoc {
            status: if r.is_some() { Status::Nonempty } else { Status::Empty },
            objective: r.as_ref().map(|r| r.shrink.objective()),
        }),
        exact_empty,
        max_gap,
        max_rich_gap,
        directions: dirs,
        oracle: oracle_pts.as_ref().map(|pts| OracleDoc {
            resolution: cfg.resolution,
            probes: probe_pts.len(),
            points: pts.len(),
            gap_points: gap_flags.iter().filter(|g| **g).count(),
        }),
        soundness,
        batch,
    };
    out.json("report.json", &report)?;

    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
    println!(
        "two-step difference {}; max support gap {} over {} directions",
        match report.two_step.status {
            Status::Nonempty => "nonempty",
            Status::Empty => "empty",
            Status::NoEnclosure => "unavailable (no enclosure)",
        },
        fmt(report.max_gap),
        report.directions.len()
    );
    if let Some(o) = &report.oracle {
        println!("oracle: {} grid points, {} missed by the two-step difference", o.points, o.gap_points);
    }
    if let Some(s) = &report.soundness {
        println!("soundness: {} samples × {} probes, {} violations", s.samples, s.probes, s.violations);
    }
    Ok(())
}
