//! Monte-Carlo volume estimates over interval-closure proposal boxes.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sets::{ConstrainedZonotope, Hyperbox, MEMBERSHIP_TOL};
use crate::validation::polygon::{polygon_2d, Polygon};

pub const DEFAULT_VOLUME_SAMPLES: usize = 100_000;
pub const DEFAULT_VOLUME_SEED: u64 = 42;
const MIN_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub bounding_box: Hyperbox,
}

impl VolumeEstimate {
    fn from_hits(hits: usize, samples: usize, bounding_box: Hyperbox) -> Self {
        let p = hits as f64 / samples as f64;
        let vol = bounding_box.volume();
        VolumeEstimate {
            value: p * vol,
            stderr: vol * (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
            bounding_box,
        }
    }
}

/// Membership oracle. Planar sets are tested against their exact polygon;
/// otherwise points outside a supporting-halfspace envelope are rejected
/// before the membership LP.
struct HitTest {
    set: ConstrainedZonotope,
    polygon: Option<Polygon>,
    envelope: Vec<(DVector<f64>, f64)>,
}

impl HitTest {
    fn new(set: &ConstrainedZonotope) -> Result<Self> {
        if set.dim() == 2 {
            return Ok(HitTest { set: set.clone(), polygon: Some(polygon_2d(set)?), envelope: Vec::new() });
        }
        let n = set.dim();
        let envelope = linalg::test_directions(n, 8 * n, 0xe1)
            .into_iter()
            .map(|h| Ok((h.clone(), set.support(&h)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(HitTest { set: set.clone(), polygon: None, envelope })
    }

    fn hit(&self, x: &DVector<f64>) -> Result<bool> {
        if let Some(p) = &self.polygon {
            return Ok(p.contains(x, MEMBERSHIP_TOL));
        }
        if self.envelope.iter().any(|(h, s)| h.dot(x) > s + MEMBERSHIP_TOL) {
            return Ok(false);
        }
        self.set.contains_point(x)
    }
}

fn uniform(bx: &Hyperbox, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(bx.dim(), |i, _| {
        let (lo, hi) = (bx.lower()[i], bx.upper()[i]);
        if hi > lo {
            rng.gen_range(lo..hi)
        } else {
            lo
        }
    })
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!("volume estimates need at least {MIN_SAMPLES} samples")));
    }
    Ok(())
}

/// Hit ratio inside the interval closure times its volume.
pub fn mc_volume(s: &ConstrainedZonotope, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    check_samples(samples)?;
    if s.is_empty()? {
        return Err(Error::EmptySet("volume of an empty set".into()));
    }
    let bx = s.interval_closure()?;
    let test = HitTest::new(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..samples {
        if test.hit(&uniform(&bx, &mut rng))? {
            hits += 1;
        }
    }
    Ok(VolumeEstimate::from_hits(hits, samples, bx))
}

/// Volume of a union: proposals from the hull of the pieces' boxes, a hit
/// when any piece contains the point.
pub fn union_volume(sets: &[ConstrainedZonotope], samples: usize, seed: u64) -> Result<VolumeEstimate> {
    check_samples(samples)?;
    let mut tests = Vec::new();
    let mut hull: Option<Hyperbox> = None;
    for s in sets {
        if s.is_empty()? {
            continue;
        }
        let bx = s.interval_closure()?;
        hull = Some(match hull {
            Some(h) => h.hull(&bx),
            None => bx.clone(),
        });
        tests.push((bx, HitTest::new(s)?));
    }
    let hull = hull.ok_or_else(|| Error::EmptySet("volume of an empty union".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..samples {
        let x = uniform(&hull, &mut rng);
        for (bx, t) in &tests {
            if bx.contains(&x, MEMBERSHIP_TOL) && t.hit(&x)? {
                hits += 1;
                break;
            }
        }
    }
    Ok(VolumeEstimate::from_hits(hits, samples, hull))
}

/// Volume of the union of the pieces' interval closures (the reporting
/// convention for high-dimensional results).
pub fn bounding_box_volume(sets: &[ConstrainedZonotope]) -> Result<f64> {
    let boxes = sets.iter().map(|s| s.interval_closure()).collect::<Result<Vec<_>>>()?;
    let Some(first) = boxes.first() else {
        return Ok(0.0);
    };
    let hull = boxes.iter().skip(1).fold(first.clone(), |h, b| h.hull(b));
    if boxes.len() == 1 {
        return Ok(hull.volume());
    }
    // Exact union volume via inclusion over box intersections would be
    // exponential; sample the hull instead.
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_VOLUME_SEED);
    let n = DEFAULT_VOLUME_SAMPLES;
    let hits = (0..n)
        .filter(|_| {
            let x = uniform(&hull, &mut rng);
            boxes.iter().any(|b| b.contains(&x, 0.0))
        })
        .count();
    Ok(hull.volume() * hits as f64 / n as f64)
}
