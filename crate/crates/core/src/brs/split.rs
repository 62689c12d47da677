//! Generator splitting, split-direction selection and farthest-point pruning.

use nalgebra::DVector;

use crate::dynamics::{remainder_intervals, SystemModel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sets::{ConstrainedZonotope, Hyperbox};

/// Splits `S` along generator `j` into two sets whose union is `S`:
/// `θ_j ∈ [0, 1]` and `θ_j ∈ [−1, 0]`, each re-parametrized onto `[−1, 1]`.
pub fn split(s: &ConstrainedZonotope, j: usize) -> Result<(ConstrainedZonotope, ConstrainedZonotope)> {
    if j >= s.num_generators() {
        return Err(Error::IndexOutOfRange { index: j, count: s.num_generators() });
    }
    let mut g = s.g().clone();
    let mut a = s.a().clone();
    let gj = s.g().column(j) * 0.5;
    let aj = s.a().column(j) * 0.5;
    g.set_column(j, &gj);
    a.set_column(j, &aj);
    let first = ConstrainedZonotope::new(g.clone(), s.c() + &gj, a.clone(), s.b() - &aj)?;
    let second = ConstrainedZonotope::new(g, s.c() - &gj, a, s.b() + &aj)?;
    Ok((first, second))
}

/// `max_i(r_i / L̄_i)` with `0/0 = 0`.
fn error_ratio(r: &DVector<f64>, l_bar: &DVector<f64>) -> f64 {
    r.iter()
        .zip(l_bar.iter())
        .map(|(&ri, &li)| match (ri > 0.0, li > 0.0) {
            (_, true) => ri / li,
            (false, false) => 0.0,
            (true, false) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Half-widths of the remainder enclosure over `piece × U`, linearized at the
/// centre of that box.
fn child_error(model: &dyn SystemModel, piece: &ConstrainedZonotope, ubox: &Hyperbox) -> Result<DVector<f64>> {
    let xbox = piece.interval_closure()?;
    let zbox = Hyperbox::new(
        linalg::vcat_vec(xbox.lower(), ubox.lower()),
        linalg::vcat_vec(xbox.upper(), ubox.upper()),
    )?;
    let r = remainder_intervals(model, &zbox.center(), &zbox)?;
    Ok(DVector::from_iterator(r.len(), r.iter().map(|iv| 0.5 * iv.width())))
}

/// Picks the generator whose split minimizes
/// `ρ_j = max(L₁ʲ / L̄) · max(L₂ʲ / L̄)`; ties go to the lowest index. Zero
/// generators are never candidates. An empty child contributes the other
/// child's factor, since the surviving half is then all of `S`.
pub fn select_split_generator(
    s: &ConstrainedZonotope,
    model: &dyn SystemModel,
    inputs: &ConstrainedZonotope,
    l_bar: &DVector<f64>,
) -> Result<usize> {
    if l_bar.len() != s.dim() {
        return Err(Error::dim("admissible error bound must match the state dimension"));
    }
    let ubox = inputs.interval_closure()?;
    let mut best: Option<(usize, f64)> = None;
    for j in 0..s.num_generators() {
        if s.g().column(j).iter().all(|v| *v == 0.0) {
            continue;
        }
        let (c1, c2) = split(s, j)?;
        let f1 = if c1.is_empty()? { None } else { Some(error_ratio(&child_error(model, &c1, &ubox)?, l_bar)) };
        let f2 = if c2.is_empty()? { None } else { Some(error_ratio(&child_error(model, &c2, &ubox)?, l_bar)) };
        let rho = match (f1, f2) {
            (Some(a), Some(b)) => a * b,
            (Some(a), None) | (None, Some(a)) => a * a,
            (None, None) => return Err(Error::EmptySet("cannot split an empty set".into())),
        };
        if rho.is_finite() && best.map_or(true, |(_, r)| rho < r) {
            best = Some((j, rho));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::NoSplitCandidate)
}

/// Indices (ascending) of at most `budget` sets chosen by greedy farthest-point
/// sampling on the centres of their interval closures, starting from the set
/// with the largest closure volume.
pub fn farthest_point_sample(sets: &[ConstrainedZonotope], budget: usize) -> Result<Vec<usize>> {
    if budget == 0 {
        return Err(Error::InvalidInput("sampling budget must be at least 1".into()));
    }
    if sets.len() <= budget {
        return Ok((0..sets.len()).collect());
    }
    let boxes = sets.iter().map(|s| s.interval_closure()).collect::<Result<Vec<_>>>()?;
    let centers: Vec<DVector<f64>> = boxes.iter().map(Hyperbox::center).collect();
    let mut seed = 0;
    for (i, b) in boxes.iter().enumerate() {
        if b.volume() > boxes[seed].volume() {
            seed = i;
        }
    }
    let mut chosen = vec![seed];
    let mut dist: Vec<f64> = centers.iter().map(|c| (c - &centers[seed]).norm()).collect();
    dist[seed] = f64::NEG_INFINITY;
    while chosen.len() < budget {
        let mut next = None;
        for (i, &d) in dist.iter().enumerate() {
            if d.is_finite() && next.map_or(true, |k: usize| d > dist[k]) {
                next = Some(i);
            }
        }
        let k = next.expect("more sets than budget");
        chosen.push(k);
        dist[k] = f64::NEG_INFINITY;
        for (i, d) in dist.iter_mut().enumerate() {
            if d.is_finite() {
                *d = d.min((&centers[i] - &centers[k]).norm());
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{double_integrator_2d, dubins_car};
    use crate::sets::Sampler;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_box(lo: &[f64], hi: &[f64]) -> ConstrainedZonotope {
        Hyperbox::from_slices(lo, hi).unwrap().to_cz()
    }

    #[test]
    fn split_interval() {
        let s = ConstrainedZonotope::from_box(&Hyperbox::from_slices(&[-1.0], &[1.0]).unwrap());
        let (a, b) = split(&s, 0).unwrap();
        assert_eq!(a.g()[(0, 0)], 0.5);
        assert_eq!(a.c()[0], 0.5);
        assert_eq!(b.c()[0], -0.5);
        assert!(split(&s, 1).is_err());
    }

    #[test]
    fn split_union_by_sampling() {
        let g = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.5, 0.2, 0.0, 1.0, -0.3, 0.4]);
        let s = ConstrainedZonotope::new(g, DVector::zeros(2), DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 0.5, -1.0]), DVector::from_vec(vec![0.3])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for j in 0..4 {
            let (c1, c2) = split(&s, j).unwrap();
            for x in Sampler::new(&s).unwrap().points(300, &mut rng) {
                assert!(c1.contains_point(&x).unwrap() || c2.contains_point(&x).unwrap());
            }
            for c in [&c1, &c2] {
                if c.is_empty().unwrap() {
                    continue;
                }
                for x in Sampler::new(c).unwrap().points(300, &mut rng) {
                    assert!(s.contains_point(&x).unwrap());
                }
            }
        }
    }

    #[test]
    fn single_candidate_and_zero_columns() {
        let m = double_integrator_2d();
        let u = unit_box(&[-1.0], &[1.0]);
        let s = ConstrainedZonotope::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DVector::zeros(2),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
        )
        .unwrap();
        let l_bar = DVector::from_element(2, 0.1);
        assert_eq!(select_split_generator(&s, &m, &u, &l_bar).unwrap(), 1);
    }

    #[test]
    fn dubins_prefers_heading_split() {
        // x3 carries all the curvature; splitting x1 or x2 does not reduce it.
        let m = dubins_car();
        let u = unit_box(&[0.04, 0.0], &[0.08, 0.04]);
        let s = unit_box(&[-0.05, -0.05, -0.4], &[0.05, 0.05, 0.4]);
        let l_bar = DVector::from_vec(vec![0.002, 0.002, 0.001]);
        assert_eq!(select_split_generator(&s, &m, &u, &l_bar).unwrap(), 2);
    }

    #[test]
    fn zero_budget_for_needed_component() {
        let m = dubins_car();
        let u = unit_box(&[0.04, 0.0], &[0.08, 0.04]);
        let s = unit_box(&[-0.05, -0.05, -0.4], &[0.05, 0.05, 0.4]);
        let l_bar = DVector::from_vec(vec![0.0, 0.002, 0.001]);
        assert_eq!(select_split_generator(&s, &m, &u, &l_bar), Err(Error::NoSplitCandidate));
    }

    #[test]
    fn farthest_points_on_a_line() {
        let sets: Vec<_> = [0.0, 1.0, 10.0].iter().map(|&x| unit_box(&[x - 0.5], &[x + 0.5])).collect();
        assert_eq!(farthest_point_sample(&sets, 2).unwrap(), vec![0, 2]);
        assert_eq!(farthest_point_sample(&sets, 5).unwrap(), vec![0, 1, 2]);
        // the largest set seeds the selection
        let mut sets = sets;
        sets[1] = unit_box(&[0.0], &[2.0]);
        assert_eq!(farthest_point_sample(&sets, 2).unwrap(), vec![1, 2]);
        assert!(farthest_point_sample(&sets, 0).is_err());
    }
}
