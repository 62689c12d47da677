use czreach::brs::{run, Method, ReachResult, Termination};
use czreach::scenarios::{double_integrator_problem, dubins_problem, linear_10d_problem, tank_problem};
use czreach::sets::{Hyperbox, SafeSet, Sampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_bookkeeping(r: &ReachResult, max_pieces: usize) {
    assert_eq!(r.records.len(), r.steps.len());
    assert_eq!(r.diagnostics.len(), r.steps.len());
    assert!(r.records[0].is_empty());
    for (k, (sets, recs)) in r.steps.iter().zip(&r.records).enumerate().skip(1) {
        assert_eq!(sets.len(), recs.len(), "step {k}");
        assert!(!sets.is_empty() && sets.len() <= max_pieces, "step {k}: {} pieces", sets.len());
        for rec in recs {
            assert!(rec.parent < r.steps[k - 1].len());
            assert!(rec.assumed.contains(&rec.observed, 1e-12), "step {k}: remainder escapes its box");
        }
    }
}

#[test]
fn horizon_zero_returns_the_target() {
    let p = double_integrator_problem(0);
    let r = run(&p).unwrap();
    assert_eq!(r.termination, Termination::HorizonReached);
    assert_eq!(r.steps.len(), 1);
    assert_eq!(r.steps[0][0], p.target);
}

#[test]
fn linear_steps_respect_the_safe_set() {
    let p = double_integrator_problem(2);
    let r = run(&p).unwrap();
    check_bookkeeping(&r, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for sets in &r.steps[1..] {
        for x in Sampler::new(&sets[0]).unwrap().points(200, &mut rng) {
            assert!(p.safe.contains(&x).unwrap());
        }
    }
}

#[test]
fn published_double_integrator_data_empties_early() {
    // |W| reaches about 0.2 per step while |B u| ≤ 0.12: the exact BRS is
    // empty from k = 3, so no under-approximation can survive longer.
    let r = run(&double_integrator_problem(10)).unwrap();
    assert_eq!(r.termination, Termination::EmptySet);
    assert_eq!(r.steps.len(), 3);
}

#[test]
fn splitting_is_deterministic_and_within_budget() {
    let p = dubins_problem(4);
    let a = run(&p).unwrap();
    let b = run(&p).unwrap();
    assert_eq!(a.termination, Termination::HorizonReached);
    assert_eq!(a.steps, b.steps);
    assert_eq!(a.diagnostics, b.diagnostics);
    check_bookkeeping(&a, p.max_branches);
}

#[test]
fn stored_pieces_avoid_the_obstacle() {
    let p = dubins_problem(4);
    let r = run(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for sets in &r.steps[1..] {
        for s in sets {
            for x in Sampler::new(s).unwrap().points(30, &mut rng) {
                let inside = x[0] > -0.3 + 1e-7 && x[0] < -0.2 - 1e-7 && x[1].abs() < 0.04 - 1e-7;
                assert!(!inside, "{x}");
            }
        }
    }
}

#[test]
fn scaling_handles_a_nonlinear_model() {
    let mut p = dubins_problem(3);
    p.method = Method::Scaling;
    p.safe = SafeSet::everything(3);
    let r = run(&p).unwrap();
    assert!(matches!(r.termination, Termination::HorizonReached | Termination::EmptySet));
    check_bookkeeping(&r, 1);
}

#[test]
fn ten_dimensional_runs() {
    let p = linear_10d_problem(3);
    let r = run(&p).unwrap();
    assert_eq!(r.termination, Termination::HorizonReached);
    check_bookkeeping(&r, p.max_branches);

    let p = tank_problem(3);
    let r = run(&p).unwrap();
    assert_eq!(r.termination, Termination::HorizonReached);
    check_bookkeeping(&r, p.max_branches);
}

#[test]
fn invalid_problems_are_rejected() {
    let mut p = dubins_problem(2);
    p.target = Hyperbox::from_slices(&[0.0; 2], &[1.0; 2]).unwrap().to_cz();
    assert!(run(&p).is_err());
    let mut p = dubins_problem(2);
    p.alpha = 0.5;
    p.method = Method::Scaling;
    assert!(run(&p).is_err());
}
