//! The acceptance suite: ten pass/fail checks at pinned tolerances. Shared by
//! the `acceptance` integration test and the CLI's `validate` subcommand.
//!
//! Every check is deterministic for a given seed. Random instances come from
//! one ChaCha stream per criterion, so running a single criterion reproduces
//! the same instances as running the whole suite.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brs::{run, subtract, split, ReachProblem, ReachResult, Termination};
use crate::error::{Error, Result};
use crate::linalg::test_directions;
use crate::minkdiff::{
    enrich_halfspace, exact_hrep_diff, min_out_simple, minkdiff_exact_via_rich, minkdiff_two_step, rich_cgrep, step_two,
    MinOutSolution,
};
use crate::scenarios::{double_integrator_problem, dubins_problem, gap_example, gap_example_sigma_bar, tank_problem};
use crate::sets::{ConstrainedZonotope, HPolytope, Sampler, Zonotope};
use crate::validation::{brute_force_diff_2d_points, certificate_into, full_min_out_objective, grid_2d, mc_volume, polygon_2d};

pub const DEFAULT_SEED: u64 = 1;

/// Pinned numeric thresholds. Loosening any of these changes what "pass" means,
/// so the defaults are the acceptance values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Membership slack for `CZ_d ⊕ Z ⊆ CZ` witnesses.
    pub soundness: f64,
    /// Support-function agreement (exactness, enrichment invariance).
    pub support: f64,
    /// Objective agreement between the two Step-I programs.
    pub min_out: f64,
    /// Membership slack for split, Minkowski-identity and certificate checks.
    pub membership: f64,
    /// Support agreement for the linear-map identity.
    pub linear_map: f64,
    pub volume_target: f64,
    pub volume_rel: f64,
    /// The computed volume must exceed this.
    pub volume_floor: f64,
    pub dubins_certificate_rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            soundness: 1e-6,
            support: 1e-5,
            min_out: 1e-6,
            membership: 1e-6,
            linear_map: 1e-6,
            volume_target: 28.343,
            volume_rel: 0.07,
            volume_floor: 7.810,
            dubins_certificate_rate: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionReport {
    /// One line for logs and the CLI table.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<36} {:>7.1}s / {:>4.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

type Check = fn(&Tolerances, &mut ChaCha8Rng) -> Result<(bool, String)>;

/// `(id, name, runtime budget in seconds, check)`.
const CRITERIA: [(usize, &str, f64, Check); 10] = [
    (1, "minkdiff soundness", 120.0, soundness),
    (2, "rich representation exactness", 120.0, rich_exactness),
    (3, "planar gap reproduction", 30.0, gap_reproduction),
    (4, "double integrator BRS volume", 300.0, double_integrator_volume),
    (5, "closed-loop certificates", 600.0, closed_loop_certificates),
    (6, "split identity", 60.0, split_identity),
    (7, "Step-I program equivalence", 60.0, program_equivalence),
    (8, "enrichment invariance", 120.0, enrichment_invariance),
    (9, "Minkowski identities", 60.0, minkowski_identities),
    (10, "tank smoke run", 900.0, tank_smoke),
];

pub fn criterion_ids() -> Vec<usize> {
    CRITERIA.iter().map(|c| c.0).collect()
}

pub fn criterion_name(id: usize) -> Option<&'static str> {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1)
}

/// Runs one criterion. Library errors count as a failure, with the error as
/// the detail.
pub fn run_criterion(id: usize, tol: &Tolerances, seed: u64) -> Result<CriterionReport> {
    let &(_, name, budget, check) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or(Error::IndexOutOfRange { index: id, count: CRITERIA.len() })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ id as u64);
    let start = Instant::now();
    let (ok, detail) = match check(tol, &mut rng) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let over = seconds > budget;
    Ok(CriterionReport {
        id,
        name: name.to_string(),
        passed: ok && !over,
        detail: if over { format!("{detail}; over the runtime budget") } else { detail },
        seconds,
        budget_seconds: budget,
    })
}

/// Runs the listed criteria (all when `only` is empty) in id order.
pub fn run_suite(tol: &Tolerances, seed: u64, only: &[usize]) -> Result<Vec<CriterionReport>> {
    criterion_ids()
        .into_iter()
        .filter(|id| only.is_empty() || only.contains(id))
        .map(|id| run_criterion(id, tol, seed))
        .collect()
}

// ---------------------------------------------------------------------------
// random instances

fn uniform_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, s: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-s..=s))
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, s: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-s..=s))
}

/// Random CZ with `m` constraints that keep an interior parameter alive.
fn random_cz(rng: &mut ChaCha8Rng, n: usize, n_gen: usize, m: usize) -> Result<ConstrainedZonotope> {
    let g = uniform_matrix(rng, n, n_gen, 1.0);
    let c = uniform_vector(rng, n, 1.0);
    let a = uniform_matrix(rng, m, n_gen, 1.0);
    let theta = uniform_vector(rng, n_gen, 0.5);
    let b = &a * theta;
    ConstrainedZonotope::new(g, c, a, b)
}

fn random_zonotope(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> Result<Zonotope> {
    let g = uniform_matrix(rng, n, k, scale);
    let c = uniform_vector(rng, n, 0.1 * scale);
    Zonotope::new(g, c)
}

/// Random bounded polytope containing the origin: random facets plus a box.
fn random_hpolytope(rng: &mut ChaCha8Rng, n: usize) -> Result<HPolytope> {
    let k = rng.gen_range(n + 1..=n + 6);
    let dirs = test_directions(n, k, rng.gen());
    let rows = k + 2 * n;
    let mut h = DMatrix::zeros(rows, n);
    let mut a = DVector::zeros(rows);
    for (i, d) in dirs.iter().enumerate() {
        h.set_row(i, &d.transpose());
        a[i] = rng.gen_range(0.6..1.5);
    }
    for j in 0..n {
        h[(k + 2 * j, j)] = 1.0;
        h[(k + 2 * j + 1, j)] = -1.0;
        a[k + 2 * j] = 2.0;
        a[k + 2 * j + 1] = 2.0;
    }
    HPolytope::new(h, a)
}

/// Sign patterns (all of them when there are at most `max_vertices`, a random
/// subset otherwise) followed by uniform parameters; `count` in total.
fn zonotope_parameters(rng: &mut ChaCha8Rng, k: usize, count: usize, max_vertices: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count);
    if k < 63 && (1usize << k) <= max_vertices {
        for mask in 0..(1usize << k) {
            out.push(DVector::from_fn(k, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }));
        }
    } else {
        for _ in 0..max_vertices {
            out.push(DVector::from_fn(k, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 }));
        }
    }
    out.truncate(count);
    while out.len() < count {
        out.push(uniform_vector(rng, k, 1.0));
    }
    out
}

fn zonotope_points(rng: &mut ChaCha8Rng, z: &Zonotope, count: usize, max_vertices: usize) -> Vec<DVector<f64>> {
    zonotope_parameters(rng, z.num_generators(), count, max_vertices)
        .into_iter()
        .map(|t| z.g() * t + z.c())
        .collect()
}

fn sample_points(rng: &mut ChaCha8Rng, s: &ConstrainedZonotope, count: usize) -> Result<Vec<DVector<f64>>> {
    Ok(Sampler::new(s)?.points(count, rng))
}

/// A polytope as a constrained zonotope (the rich form relative to `{0}`).
fn polytope_cz(p: &HPolytope) -> Result<ConstrainedZonotope> {
    rich_cgrep(p, &Zonotope::point(DVector::zeros(p.dim())))
}

// ---------------------------------------------------------------------------
// 1. CZ_d ⊕ Z ⊆ CZ

/// Outcome of a batch of random `CZ_d ⊕ Z ⊆ CZ` checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SoundnessStats {
    pub instances: usize,
    /// Instances with a nonempty difference, i.e. something to check.
    pub checked: usize,
    pub witness_pairs: usize,
    pub lp_pairs: usize,
    pub violations: usize,
}

/// Random minuends (`n ∈ {2,3,4}`, at most 12 generators and 2 constraints)
/// and subtrahends (at most 6 generators). Pairs `(x_d, z)` are certified
/// through the parameter `μ = diag(1 − σ̄) φ_d + Γ φ_w`, checked against the
/// original minuend data; `lp_pairs` pairs per instance are re-checked with
/// the membership LP.
pub fn soundness_batch(
    rng: &mut ChaCha8Rng,
    instances: usize,
    diff_samples: usize,
    sub_samples: usize,
    lp_pairs: usize,
    tol: f64,
) -> Result<SoundnessStats> {
    let mut st = SoundnessStats { instances, ..Default::default() };
    for inst in 0..instances {
        let n = 2 + inst % 3;
        let m = rng.gen_range(0..=2);
        let n_gen = rng.gen_range(n + m + 1..=12);
        let cz = random_cz(rng, n, n_gen, m)?;
        let k = rng.gen_range(1..=6);
        let z = random_zonotope(rng, n, k, 0.3 / k as f64)?;
        let res = match minkdiff_two_step(&cz, &z, false) {
            Ok(r) => r,
            Err(Error::NoEnclosure) => continue,
            Err(e) => return Err(e),
        };
        if res.difference.is_empty()? {
            continue;
        }
        st.checked += 1;
        let draws = Sampler::new(&res.difference)?.draws(diff_samples, rng);
        let phis = zonotope_parameters(rng, k, sub_samples, 64);
        let keep = res.shrink.sigma_bar.map(|s| 1.0 - s);
        for (phi_d, x_d) in &draws {
            let base = keep.component_mul(phi_d);
            for phi_w in &phis {
                let mu = &base + &res.shrink.gamma * phi_w;
                let x = x_d + z.g() * phi_w + z.c();
                st.witness_pairs += 1;
                if !cz.witness_ok(&mu, &x, tol) {
                    st.violations += 1;
                }
            }
        }
        for i in 0..lp_pairs {
            let (_, x_d) = &draws[(i * 97) % draws.len()];
            let x = x_d + z.g() * &phis[(i * 13) % phis.len()] + z.c();
            st.lp_pairs += 1;
            if !cz.contains_point_tol(&x, tol)? {
                st.violations += 1;
            }
        }
    }
    Ok(st)
}

fn soundness(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const INSTANCES: usize = 200;
    let st = soundness_batch(rng, INSTANCES, 1000, 100, 10, tol.soundness)?;
    Ok((
        st.violations == 0 && st.checked >= INSTANCES / 2,
        format!(
            "{} instances checked ({} with empty difference), {} witness pairs + {} LP pairs, {} violations",
            st.checked,
            INSTANCES - st.checked,
            st.witness_pairs,
            st.lp_pairs,
            st.violations
        ),
    ))
}

// ---------------------------------------------------------------------------
// 2. rich representation vs exact H-Rep difference

fn rich_exactness(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const INSTANCES: usize = 100;
    let (mut nonempty, mut empty, mut mismatched, mut worst) = (0, 0, 0, 0.0_f64);
    let mut verdicts_disagree = 0;
    for inst in 0..INSTANCES {
        let n = 2 + inst % 2;
        let p = random_hpolytope(rng, n)?;
        let k = rng.gen_range(1..=4);
        // Every fifth subtrahend is large enough to empty the difference.
        let scale = if inst % 5 == 4 { 1.5 } else { 0.3 } / k as f64;
        let z = random_zonotope(rng, n, k, scale)?;
        let exact = exact_hrep_diff(&p, &z)?;
        let exact_empty = exact.is_empty()?;
        match (exact_empty, minkdiff_exact_via_rich(&p, &z)?) {
            (true, None) => empty += 1,
            (false, Some(r)) => {
                nonempty += 1;
                let mut gap = 0.0_f64;
                for d in test_directions(n, 64, 1000 + inst as u64) {
                    let want = exact.support(&d)?.ok_or(Error::Numerical("exact support missing".into()))?;
                    match r.difference.try_support(&d)? {
                        Some(got) => gap = gap.max((got - want).abs()),
                        None => gap = f64::INFINITY,
                    }
                }
                worst = worst.max(gap);
                if gap > tol.support {
                    mismatched += 1;
                }
            }
            _ => verdicts_disagree += 1,
        }
    }
    Ok((
        mismatched == 0 && verdicts_disagree == 0 && nonempty > 0,
        format!(
            "{nonempty} nonempty (worst support gap {worst:.1e}, {mismatched} over), {empty} empty agreed, {verdicts_disagree} verdict mismatches"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 3. the planar gap

fn gap_reproduction(_tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const RESOLUTION: usize = 200;
    let cz = gap_example();
    let sigma = gap_example_sigma_bar();
    let sol = MinOutSolution {
        sigma_bar: sigma.clone(),
        gamma: DMatrix::zeros(sigma.len(), 0),
        c_s: DVector::zeros(2),
        b_s: DVector::zeros(cz.num_constraints()),
        lp_iterations: 0,
    };
    let res = step_two(&cz, &sol)?;
    // CZ ⊖ CZ_s on the grid: CZ is convex, so probing the vertices of CZ_s is exact.
    let probes = polygon_2d(&res.enclosing)?.vertices().to_vec();
    let oracle = brute_force_diff_2d_points(&cz, &probes, RESOLUTION)?;
    let d_poly = polygon_2d(&res.difference)?;
    let c_poly = polygon_2d(&cz)?;
    let in_gap = oracle.iter().filter(|x| !d_poly.contains(x, 1e-9)).count();
    // Grid points of CZ_d must all be oracle points.
    let grid = grid_2d(&cz.interval_closure()?, RESOLUTION);
    let oracle_set: std::collections::HashSet<(u64, u64)> =
        oracle.iter().map(|x| (x[0].to_bits(), x[1].to_bits())).collect();
    let d_grid: Vec<_> = grid.iter().filter(|x| d_poly.contains(x, 0.0)).collect();
    let d_grid_outside = d_grid.iter().filter(|x| !oracle_set.contains(&(x[0].to_bits(), x[1].to_bits()))).count();
    // And so must random members of CZ_d.
    let samples = sample_points(rng, &res.difference, 1000)?;
    let sample_outside = samples
        .iter()
        .filter(|x| !probes.iter().all(|v| c_poly.contains(&(*x + v), 1e-9)))
        .count();
    Ok((
        in_gap >= 1 && d_grid_outside == 0 && sample_outside == 0,
        format!(
            "{} oracle points, {in_gap} in the gap; {} grid points of CZ_d ({d_grid_outside} outside), {} samples ({sample_outside} outside)",
            oracle.len(),
            d_grid.len(),
            samples.len()
        ),
    ))
}

// ---------------------------------------------------------------------------
// 4. double integrator volume

fn double_integrator_volume(tol: &Tolerances, _rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const HORIZON: usize = 100;
    let r = run(&double_integrator_problem(HORIZON))?;
    if r.termination != Termination::HorizonReached {
        return Ok((
            false,
            format!("BRS stopped after {} steps ({:?}); no volume at k = {HORIZON}", r.steps.len() - 1, r.termination),
        ));
    }
    let v = mc_volume(&r.last()[0], 100_000, 42)?;
    let rel = (v.value - tol.volume_target).abs() / tol.volume_target;
    Ok((
        rel <= tol.volume_rel && v.value > tol.volume_floor,
        format!("volume {:.3} ± {:.3} (target {} ± {:.0}%)", v.value, v.stderr, tol.volume_target, 100.0 * tol.volume_rel),
    ))
}

// ---------------------------------------------------------------------------
// 5 and 10. certificates along a computed BRS

#[derive(Debug, Default)]
struct CertificateStats {
    samples: usize,
    certified: usize,
    /// Samples whose owning piece satisfied `LE ⊆ L` at exit.
    piece_le_ok: usize,
    /// Certified samples whose pointwise error `f(x,u) − Ax − Bu` lies in `L`.
    pointwise_checked: usize,
    pointwise_ok: usize,
}

/// Samples `per_step` states of every step set (spread over the pieces) and
/// checks that some `u ∈ U` steers the linearized successor into
/// `source ⊖ (W ⊕ L)`, that the true successor `f(x, u) + w` then lands in the
/// source piece for probe disturbances `w`, and that the pointwise error lies
/// in the assumed error set.
fn certify(p: &ReachProblem, r: &ReachResult, per_step: usize, tol: f64, rng: &mut ChaCha8Rng) -> Result<CertificateStats> {
    let mut st = CertificateStats::default();
    let w_probes = zonotope_points(rng, &p.disturbance, 10, 8);
    for k in 1..r.steps.len() {
        let sets = &r.steps[k];
        let recs = &r.records[k];
        let count = sets.len();
        for (i, (set, rec)) in sets.iter().zip(recs).enumerate() {
            let share = per_step / count + usize::from(i < per_step % count);
            if share == 0 {
                continue;
            }
            let le_ok = rec.assumed.contains(&rec.observed, 1e-12);
            let lin = &rec.linearization;
            let d = subtract(&rec.source, &rec.assumed.to_zonotope().minkowski_sum(&p.disturbance)?)?;
            for x in sample_points(rng, set, share)? {
                st.samples += 1;
                if le_ok {
                    st.piece_le_ok += 1;
                }
                let Some(d) = d.as_ref() else { continue };
                let Some(u) = certificate_into(&x, &lin.a, &lin.b, d, &p.inputs)? else {
                    continue;
                };
                let fx = p.model.eval(&x, &u)?;
                let err = &fx - &lin.a * &x - &lin.b * &u;
                st.pointwise_checked += 1;
                if rec.assumed.bounds.contains(&err, tol) {
                    st.pointwise_ok += 1;
                }
                let mut lands = true;
                for w in &w_probes {
                    if !rec.source.contains_point_tol(&(&fx + w), tol)? {
                        lands = false;
                        break;
                    }
                }
                if lands {
                    st.certified += 1;
                }
            }
        }
    }
    Ok(st)
}

fn closed_loop_certificates(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let di = double_integrator_problem(100);
    let r_di = run(&di)?;
    let s_di = certify(&di, &r_di, 200, tol.membership, rng)?;
    let di_ok = s_di.samples > 0 && s_di.certified == s_di.samples && s_di.pointwise_ok == s_di.pointwise_checked;

    let du = dubins_problem(10);
    let r_du = run(&du)?;
    let s_du = certify(&du, &r_du, 200, tol.membership, rng)?;
    let rate = s_du.certified as f64 / s_du.samples.max(1) as f64;
    let du_ok = r_du.termination == Termination::HorizonReached
        && rate >= tol.dubins_certificate_rate
        && s_du.piece_le_ok == s_du.samples
        && s_du.pointwise_ok == s_du.pointwise_checked;
    Ok((
        di_ok && du_ok,
        format!(
            "double integrator: {}/{} certified over {} steps; Dubins ({:?}): {}/{} certified ({:.1}%), LE ⊆ L {}/{}, pointwise {}/{}",
            s_di.certified,
            s_di.samples,
            r_di.steps.len() - 1,
            r_du.termination,
            s_du.certified,
            s_du.samples,
            100.0 * rate,
            s_du.piece_le_ok,
            s_du.samples,
            s_du.pointwise_ok,
            s_du.pointwise_checked
        ),
    ))
}

fn tank_smoke(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = tank_problem(20);
    let r = run(&p)?;
    let s = certify(&p, &r, 50, tol.membership, rng)?;
    let nonempty = r.steps.iter().all(|step| !step.is_empty());
    let ok = r.termination == Termination::HorizonReached
        && nonempty
        && s.samples == 50 * p.horizon
        && s.certified == s.samples
        && s.piece_le_ok == s.samples
        && s.pointwise_ok == s.pointwise_checked;
    Ok((
        ok,
        format!(
            "{:?} after {} steps (max {} pieces); {}/{} certified, LE ⊆ L {}/{}",
            r.termination,
            r.steps.len() - 1,
            r.steps.iter().map(Vec::len).max().unwrap_or(0),
            s.certified,
            s.samples,
            s.piece_le_ok,
            s.samples
        ),
    ))
}

// ---------------------------------------------------------------------------
// 6. splitting along a generator

/// Parent samples are mapped to the child owning their `θ_j` half and checked
/// with that child's data; child samples are mapped back likewise. A few of
/// each are re-checked by the membership LP.
fn split_identity(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const INSTANCES: usize = 500;
    const SAMPLES: usize = 2000;
    const LP_SAMPLES: usize = 4;
    let (mut checks, mut failures) = (0usize, 0usize);
    for inst in 0..INSTANCES {
        let n = 2 + inst % 3;
        let m = rng.gen_range(0..=2);
        let n_gen = rng.gen_range(n + m + 1..=10);
        let s = random_cz(rng, n, n_gen, m)?;
        let j = rng.gen_range(0..n_gen);
        let (upper, lower) = split(&s, j)?;

        for (i, (theta, x)) in Sampler::new(&s)?.draws(SAMPLES, rng).into_iter().enumerate() {
            let mut t = theta.clone();
            let child = if theta[j] >= 0.0 {
                t[j] = 2.0 * theta[j] - 1.0;
                &upper
            } else {
                t[j] = 2.0 * theta[j] + 1.0;
                &lower
            };
            checks += 1;
            let mut ok = child.witness_ok(&t, &x, tol.membership);
            if i < LP_SAMPLES {
                ok &= upper.contains_point_tol(&x, tol.membership)? || lower.contains_point_tol(&x, tol.membership)?;
            }
            failures += usize::from(!ok);
        }
        for (child, shift) in [(&upper, 1.0), (&lower, -1.0)] {
            if child.is_empty()? {
                continue;
            }
            for (i, (theta, x)) in Sampler::new(child)?.draws(SAMPLES / 2, rng).into_iter().enumerate() {
                let mut t = theta.clone();
                t[j] = (theta[j] + shift) / 2.0;
                checks += 1;
                let mut ok = s.witness_ok(&t, &x, tol.membership);
                if i < LP_SAMPLES {
                    ok &= s.contains_point_tol(&x, tol.membership)?;
                }
                failures += usize::from(!ok);
            }
        }
    }
    Ok((failures == 0, format!("{INSTANCES} splits, {checks} membership checks, {failures} failures")))
}

// ---------------------------------------------------------------------------
// 7. the simplified Step-I program against the full one

fn program_equivalence(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const INSTANCES: usize = 50;
    let (mut feasible, mut infeasible, mut bad, mut worst) = (0, 0, 0, 0.0_f64);
    for _ in 0..INSTANCES {
        let n = 2;
        let m = rng.gen_range(0..=2);
        let n_gen = rng.gen_range(n + m + 1..=6);
        let cz = random_cz(rng, n, n_gen, m)?;
        let k = rng.gen_range(1..=3);
        let z = random_zonotope(rng, n, k, 0.3 / k as f64)?;
        let full = full_min_out_objective(&cz, &z)?;
        let simple = match min_out_simple(&cz, &z) {
            Ok(s) => Some(s.objective()),
            Err(Error::NoEnclosure) => None,
            Err(e) => return Err(e),
        };
        match (full, simple) {
            (Some(f), Some(s)) => {
                feasible += 1;
                let gap = (f - s).abs();
                worst = worst.max(gap);
                bad += usize::from(gap > tol.min_out);
            }
            (None, None) => infeasible += 1,
            _ => bad += 1,
        }
    }
    Ok((
        bad == 0 && feasible > 0,
        format!("{feasible} feasible (worst gap {worst:.1e}), {infeasible} infeasible in both, {bad} disagreements"),
    ))
}

// ---------------------------------------------------------------------------
// 8. enrichment

fn enrichment_invariance(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const INSTANCES: usize = 50;
    const SAMPLES: usize = 200;
    let (mut checked, mut vacuous, mut unequal, mut escaped, mut worst) = (0, 0, 0, 0usize, 0.0_f64);
    for inst in 0..INSTANCES {
        let n = 2 + inst % 2;
        let m = rng.gen_range(0..=1);
        let n_gen = rng.gen_range(n + m + 2..=8);
        let cz = random_cz(rng, n, n_gen, m)?;
        let k = rng.gen_range(1..=3);
        let z = random_zonotope(rng, n, k, 0.2 / k as f64)?;
        let h = test_directions(n, 1, rng.gen())[0].clone();
        let a = cz.support(&h)? + rng.gen_range(0.0..0.5);
        let rich = enrich_halfspace(&cz, &h, a)?;
        let (before, after) = match (minkdiff_two_step(&cz, &z, false), minkdiff_two_step(&rich, &z, false)) {
            (Ok(b), Ok(a)) => (b, a),
            (Err(Error::NoEnclosure), Err(Error::NoEnclosure)) => {
                vacuous += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        checked += 1;
        let mut gap = 0.0_f64;
        for d in test_directions(n, 64, 2000 + inst as u64) {
            match (before.difference.try_support(&d)?, after.difference.try_support(&d)?) {
                (Some(x), Some(y)) => gap = gap.max((x - y).abs()),
                (None, None) => {}
                _ => gap = f64::INFINITY,
            }
        }
        worst = worst.max(gap);
        unequal += usize::from(gap > tol.support);
        let cap = z.support(&h);
        for x in sample_points(rng, &after.enclosing, SAMPLES)? {
            if h.dot(&x) > cap + tol.membership || !before.enclosing.contains_point_tol(&x, tol.membership)? {
                escaped += 1;
            }
        }
    }
    Ok((
        unequal == 0 && escaped == 0 && checked > 0,
        format!(
            "{checked} instances ({vacuous} without enclosure): worst difference gap {worst:.1e} ({unequal} over), {escaped} CZ_s samples outside the bound"
        ),
    ))
}

// ---------------------------------------------------------------------------
// 9. Minkowski identities

fn minkowski_identities(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    const TRIPLES: usize = 100;
    const POINTS: usize = 20;
    let mut worst_i = 0.0_f64;
    let (mut failures, mut points, mut skipped) = ([0usize; 4], 0usize, 0usize);
    let member = |s: &ConstrainedZonotope, x: &DVector<f64>| s.contains_point_tol(x, tol.membership);
    let in_poly = |p: &HPolytope, x: &DVector<f64>| p.max_violation(x) <= tol.membership;
    for t in 0..TRIPLES {
        let big_n = 2 + t % 2;
        let n = rng.gen_range(1..=big_n);
        let m = uniform_matrix(rng, n, big_n, 1.0);

        // i) M(A ⊕ B) = MA ⊕ MB
        let (ga, ma) = (rng.gen_range(big_n + 1..=6), rng.gen_range(0..=1));
        let a = random_cz(rng, big_n, ga, ma)?;
        let (gb, mb) = (rng.gen_range(big_n + 1..=6), rng.gen_range(0..=1));
        let b = random_cz(rng, big_n, gb, mb)?;
        let lhs = a.minkowski_sum(&b)?.linear_map(&m)?;
        let rhs = a.linear_map(&m)?.minkowski_sum(&b.linear_map(&m)?)?;
        for d in test_directions(n, 16, 3000 + t as u64) {
            let (x, y) = (lhs.support(&d)?, rhs.support(&d)?);
            let gap = (x - y).abs() / (1.0 + x.abs());
            worst_i = worst_i.max(gap);
            failures[0] += usize::from(gap > tol.linear_map);
        }

        let pa = random_hpolytope(rng, big_n)?;
        let pb = {
            let q = random_hpolytope(rng, big_n)?;
            let shift = uniform_vector(rng, big_n, 0.8);
            let off = q.a() + q.h() * &shift;
            HPolytope::new(q.h().clone(), off)?
        };
        let k = rng.gen_range(1..=3);
        let zb = random_zonotope(rng, big_n, k, 0.3 / k as f64)?;
        let kc = rng.gen_range(1..=3);
        let zc = random_zonotope(rng, big_n, kc, 0.2)?;
        let pa_diff = exact_hrep_diff(&pa, &zb)?;
        if pa_diff.is_empty()? {
            skipped += 1;
            continue;
        }
        let pa_diff_cz = polytope_cz(&pa_diff)?;
        let pa_cz = polytope_cz(&pa)?;
        let b_vertices = zonotope_points(rng, &zb, 1 << k, 1 << k);

        // ii) M(A ⊖ B) ⊆ MA ⊖ MB: y + Mv ∈ MA for every vertex v of B.
        let ma = pa_cz.linear_map(&m)?;
        for s in sample_points(rng, &pa_diff_cz, POINTS)? {
            let y = &m * s;
            points += 1;
            let mut ok = true;
            for v in &b_vertices {
                ok &= member(&ma, &(&y + &m * v))?;
            }
            failures[1] += usize::from(!ok);
        }

        // iii) (A ⊖ C) ∪ (B ⊖ C) ⊆ (A ∪ B) ⊖ C, probing C at vertices and samples.
        let c_probes = zonotope_points(rng, &zc, 40, 16);
        for p in [&pa, &pb] {
            let diff = exact_hrep_diff(p, &zc)?;
            if diff.is_empty()? {
                continue;
            }
            for x in sample_points(rng, &polytope_cz(&diff)?, POINTS)? {
                points += 1;
                let ok = c_probes.iter().all(|c| {
                    let y = &x + c;
                    in_poly(&pa, &y) || in_poly(&pb, &y)
                });
                failures[2] += usize::from(!ok);
            }
        }

        // iv) (A ⊖ B) ⊕ C ⊆ (A ⊕ C) ⊖ B.
        let a_plus_c = pa_cz.minkowski_sum_zonotope(&zc)?;
        let lefts = sample_points(rng, &pa_diff_cz, POINTS)?;
        let cs = zonotope_points(rng, &zc, POINTS, 8);
        for (s, c) in lefts.iter().zip(&cs) {
            let p = s + c;
            points += 1;
            let mut ok = true;
            for v in &b_vertices {
                ok &= member(&a_plus_c, &(&p + v))?;
            }
            failures[3] += usize::from(!ok);
        }
    }
    let total: usize = failures.iter().sum();
    Ok((
        total == 0,
        format!(
            "i) worst support gap {worst_i:.1e}; ii)-iv) {points} points, failures {:?}; {skipped} triples with empty A ⊖ B skipped",
            failures
        ),
    ))
}
