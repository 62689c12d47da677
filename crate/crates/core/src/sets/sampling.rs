//! Drawing member points of a constrained zonotope.
//!
//! Samples only need to be valid members (for soundness checks and plots), not
//! uniformly distributed. Parameters are drawn uniformly in the box and
//! projected onto `{Aθ = b}`; when fewer than 1% of projections land inside the
//! box the sampler switches to hit-and-run inside the feasible parameter
//! polytope, started from a max-margin interior point.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sets::ConstrainedZonotope;

const PILOT_DRAWS: usize = 400;
const MIN_ACCEPTANCE: f64 = 0.01;
const THINNING: usize = 5;

#[derive(Clone, Debug)]
pub struct Sampler {
    cz: ConstrainedZonotope,
    pinv: DMatrix<f64>,
    null: DMatrix<f64>,
    start: DVector<f64>,
    mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Box,
    Project,
    HitAndRun,
}

impl Sampler {
    /// Errors with `EmptySet` when there is nothing to sample.
    pub fn new(cz: &ConstrainedZonotope) -> Result<Self> {
        let n = cz.num_generators();
        if cz.num_constraints() == 0 {
            return Ok(Sampler {
                cz: cz.clone(),
                pinv: DMatrix::zeros(n, 0),
                null: DMatrix::identity(n, n),
                start: DVector::zeros(n),
                mode: Mode::Box,
            });
        }
        let (start, _) = cz
            .interior_parameter()?
            .ok_or_else(|| Error::EmptySet("cannot sample an empty constrained zonotope".into()))?;
        let pinv = linalg::pinv(cz.a());
        let null = linalg::null_space(cz.a(), 1e-10);
        let mut s = Sampler {
            cz: cz.clone(),
            pinv,
            null,
            start,
            mode: Mode::Project,
        };
        // Pilot run with a fixed internal stream to pick the strategy.
        let mut pilot = rand_chacha::ChaCha8Rng::seed_from_u64_const();
        let accepted = (0..PILOT_DRAWS).filter(|_| s.try_project(&mut pilot).is_some()).count();
        if (accepted as f64) < MIN_ACCEPTANCE * PILOT_DRAWS as f64 {
            s.mode = Mode::HitAndRun;
        }
        Ok(s)
    }

    pub fn set(&self) -> &ConstrainedZonotope {
        &self.cz
    }

    fn try_project<R: Rng>(&self, rng: &mut R) -> Option<DVector<f64>> {
        let n = self.cz.num_generators();
        let theta = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
        let r = self.cz.a() * &theta - self.cz.b();
        let p = theta - &self.pinv * r;
        if p.iter().all(|t| t.abs() <= 1.0) && self.feasible(&p) {
            Some(p)
        } else {
            None
        }
    }

    fn feasible(&self, theta: &DVector<f64>) -> bool {
        let scale = 1.0 + self.cz.b().amax();
        (self.cz.a() * theta - self.cz.b()).amax() <= 1e-9 * scale
    }

    /// Pulls `θ` back onto `{Aθ = b}` and into the box after round-off drift.
    fn clean(&self, theta: DVector<f64>) -> DVector<f64> {
        let r = self.cz.a() * &theta - self.cz.b();
        let p = &theta - &self.pinv * r;
        let p = p.map(|t| t.clamp(-1.0, 1.0));
        if self.feasible(&p) {
            p
        } else {
            theta.map(|t| t.clamp(-1.0, 1.0))
        }
    }

    fn hit_and_run_step<R: Rng>(&self, theta: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let k = self.null.ncols();
        if k == 0 {
            return theta.clone();
        }
        let r = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..=1.0));
        let d = &self.null * r;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..theta.len() {
            if d[i].abs() < 1e-14 {
                continue;
            }
            let a = (-1.0 - theta[i]) / d[i];
            let b = (1.0 - theta[i]) / d[i];
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return theta.clone();
        }
        let t = rng.gen_range(lo..=hi);
        theta + d * t
    }

    /// `count` admissible parameter vectors.
    pub fn parameters<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<DVector<f64>> {
        let n = self.cz.num_generators();
        match self.mode {
            Mode::Box => (0..count)
                .map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0)))
                .collect(),
            Mode::Project => {
                let mut out = Vec::with_capacity(count);
                let mut misses = 0usize;
                while out.len() < count {
                    match self.try_project(rng) {
                        Some(p) => out.push(p),
                        None => {
                            misses += 1;
                            // A run of bad luck: finish with the chain.
                            if misses > 200 * (count + 10) {
                                out.extend(self.chain(count - out.len(), rng));
                            }
                        }
                    }
                }
                out
            }
            Mode::HitAndRun => self.chain(count, rng),
        }
    }

    fn chain<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<DVector<f64>> {
        let mut theta = self.start.clone();
        let burn = 10 * THINNING;
        for _ in 0..burn {
            theta = self.hit_and_run_step(&theta, rng);
        }
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            for _ in 0..THINNING {
                theta = self.hit_and_run_step(&theta, rng);
            }
            if i % 16 == 15 {
                theta = self.clean(theta);
            }
            out.push(self.clean(theta.clone()));
        }
        out
    }

    pub fn points<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<DVector<f64>> {
        self.parameters(count, rng)
            .into_iter()
            .map(|t| self.cz.point_of(&t))
            .collect()
    }

    /// Pairs of (parameter, point).
    pub fn draws<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<(DVector<f64>, DVector<f64>)> {
        self.parameters(count, rng)
            .into_iter()
            .map(|t| {
                let x = self.cz.point_of(&t);
                (t, x)
            })
            .collect()
    }
}

trait FixedSeed {
    fn seed_from_u64_const() -> Self;
}

impl FixedSeed for rand_chacha::ChaCha8Rng {
    fn seed_from_u64_const() -> Self {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed)
    }
}
