//! Local search for unit-weight disks over unit-capacity points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Direction, GeometricInstance, Region};
use crate::hypergraph::{Hypergraph, PackingSolution};
use crate::scalar::Scalar;

pub const DEFAULT_B: usize = 3;
pub const MAX_B: usize = 4;
/// Largest instance the exhaustive verifier accepts.
pub const VERIFY_MAX_N: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Swap {
    pub removed: Vec<usize>,
    pub inserted: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalSearchReport<T> {
    pub solution: PackingSolution<T>,
    pub swaps: Vec<Swap>,
    /// Disks never considered because another disk's points are a subset
    /// of theirs.
    pub pruned: Vec<usize>,
}

/// Conflict structure: `points[v]` is the sorted list of point edges of `v`.
struct Conflicts {
    points: Vec<Vec<usize>>,
    occupants: Vec<Vec<usize>>,
}

impl Conflicts {
    fn new<T: Scalar>(h: &Hypergraph<T>) -> Self {
        let points = (0..h.num_vertices()).map(|v| h.incident(v).to_vec()).collect();
        let occupants = h.edges().iter().map(|e| e.vertices.clone()).collect();
        Conflicts { points, occupants }
    }

    fn conflict(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (&self.points[a], &self.points[b]);
        let (mut i, mut j) = (0, 0);
        while i < pa.len() && j < pb.len() {
            match pa[i].cmp(&pb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Members of `current` sharing a point with some disk of `xs`.
    fn blockers(&self, xs: &[usize], current: &[bool]) -> Vec<usize> {
        let mut out: Vec<usize> =
            xs.iter().flat_map(|&x| self.points[x].iter().flat_map(|&e| self.occupants[e].iter().copied())).filter(|&v| current[v]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Lexicographically first improving swap among sets of size `size`
    /// drawn from `pool` (sorted) and starting with `pool[first]`.
    fn swap_from(&self, pool: &[usize], first: usize, size: usize, current: &[bool]) -> Option<Swap> {
        let mut idx = vec![first];
        loop {
            // Extend the partial choice, or backtrack when it cannot grow.
            if idx.len() == size {
                let xs: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
                let ys = self.blockers(&xs, current);
                if ys.len() < size {
                    return Some(Swap { removed: ys, inserted: xs });
                }
            } else {
                let last = *idx.last().expect("nonempty");
                if let Some(next) = (last + 1..pool.len()).find(|&c| idx.iter().all(|&i| !self.conflict(pool[i], pool[c]))) {
                    idx.push(next);
                    continue;
                }
            }
            // Advance the deepest position that has a further option.
            loop {
                if idx.len() == 1 {
                    return None;
                }
                let last = idx.pop().expect("nonempty");
                let fixed = &idx;
                if let Some(next) = (last + 1..pool.len()).find(|&c| fixed.iter().all(|&i| !self.conflict(pool[i], pool[c]))) {
                    idx.push(next);
                    break;
                }
            }
        }
    }

    fn first_swap(&self, pool: &[usize], b: usize, current: &[bool]) -> Option<Swap> {
        (1..=b + 1).find_map(|size| (0..pool.len()).into_par_iter().find_map_first(|f| self.swap_from(pool, f, size, current)))
    }
}

fn check_instance<T: Scalar>(inst: &GeometricInstance<T>) -> Result<Hypergraph<T>> {
    if inst.direction != Direction::PackRegions
        || inst.regions.iter().any(|r| !matches!(r, Region::Disk(_)))
        || inst.region_values.iter().any(|&w| w != 1.0)
        || inst.point_values.iter().any(|&c| c != 1.0)
    {
        return Err(Error::InvalidInstance("local search needs unit-weight disks over unit-capacity points".into()));
    }
    Ok(inst.build_hypergraph::<T>()?.hypergraph)
}

/// Disks whose point sets strictly contain another disk's, or equal one of
/// a lower index.
fn prune(c: &Conflicts) -> Vec<bool> {
    let n = c.points.len();
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|e| b.binary_search(e).is_ok());
    (0..n)
        .map(|j| {
            (0..n).any(|i| {
                i != j && !c.points[i].is_empty() && subset(&c.points[i], &c.points[j]) && (c.points[i].len() < c.points[j].len() || i < j)
            })
        })
        .collect()
}

pub fn local_search_disks<T: Scalar>(inst: &GeometricInstance<T>, b: usize) -> Result<LocalSearchReport<T>> {
    if !(1..=MAX_B).contains(&b) {
        return Err(Error::InvalidConfig(format!("b must be in 1..={MAX_B}")));
    }
    let h = check_instance(inst)?;
    let c = Conflicts::new(&h);
    let n = h.num_vertices();
    let pruned_flags = prune(&c);
    let mut current = vec![false; n];
    // Disks without points never conflict and are always taken.
    for (cur, pts) in current.iter_mut().zip(&c.points) {
        *cur = pts.is_empty();
    }
    let mut swaps = Vec::new();
    loop {
        let pool: Vec<usize> = (0..n).filter(|&v| !current[v] && !pruned_flags[v]).collect();
        let Some(swap) = c.first_swap(&pool, b, &current) else { break };
        swap.removed.iter().for_each(|&v| current[v] = false);
        swap.inserted.iter().for_each(|&v| current[v] = true);
        let chosen: Vec<usize> = (0..n).filter(|&v| current[v]).collect();
        assert!(h.check_packing(&chosen, 1)?.feasible, "swap broke feasibility");
        swaps.push(swap);
        debug_assert!(swaps.len() <= n);
    }
    let chosen: Vec<usize> = (0..n).filter(|&v| current[v]).collect();
    Ok(LocalSearchReport {
        solution: h.check_packing(&chosen, 1)?,
        swaps,
        pruned: (0..n).filter(|&v| pruned_flags[v]).collect(),
    })
}

/// An improving swap of at most `b` removals against `set`, or `None` when
/// `set` is b-locally optimal.
pub fn verify_b_local_optimality<T: Scalar>(inst: &GeometricInstance<T>, set: &[usize], b: usize) -> Result<Option<Swap>> {
    if b > MAX_B || inst.regions.len() > VERIFY_MAX_N {
        return Err(Error::TooLarge(format!("verification is limited to n <= {VERIFY_MAX_N} and b <= {MAX_B}")));
    }
    let h = check_instance(inst)?;
    let packing = h.check_packing(set, 1)?;
    if !packing.feasible {
        return Err(Error::Infeasible("set is not pointwise independent".into()));
    }
    let c = Conflicts::new(&h);
    let mut current = vec![false; h.num_vertices()];
    packing.chosen.iter().for_each(|&v| current[v] = true);
    let pool: Vec<usize> = (0..h.num_vertices()).filter(|&v| !current[v]).collect();
    Ok(c.first_swap(&pool, b, &current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ClassTag, Disk, Point, Point2};
    use crate::oracle::exact_pack;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(disks: &[(f64, f64, f64)], points: &[(f64, f64)]) -> GeometricInstance<f64> {
        GeometricInstance::new(
            Direction::PackRegions,
            points.iter().map(|&(x, y)| Point::Planar(Point2::new(x, y))).collect(),
            vec![1.0; points.len()],
            disks.iter().map(|&(x, y, r)| Region::Disk(Disk::new(Point2::new(x, y), r).unwrap())).collect(),
            vec![1.0; disks.len()],
            ClassTag::Disk,
        )
        .unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> GeometricInstance<f64> {
        let disks: Vec<(f64, f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0), 1.0)).collect();
        let points: Vec<(f64, f64)> = (0..m).map(|_| (rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0))).collect();
        instance(&disks, &points)
    }

    #[test]
    fn disjoint_disks() {
        let inst = instance(&[(0.0, 0.0, 1.0), (5.0, 0.0, 1.0)], &[(0.0, 0.0), (5.0, 0.0)]);
        assert_eq!(local_search_disks(&inst, 3).unwrap().solution.chosen, vec![0, 1]);
    }

    #[test]
    fn k3_lenses() {
        let s3 = 3f64.sqrt();
        let disks = [(0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (0.5, s3 / 2.0, 1.0)];
        let lenses = [(0.5, -0.5), (0.25 - s3 / 4.0, s3 / 4.0 + 0.25), (0.75 + s3 / 4.0, s3 / 4.0 + 0.25)];
        let inst = instance(&disks, &lenses);
        let h = inst.build_hypergraph::<f64>().unwrap().hypergraph;
        assert!(h.edges().iter().all(|e| e.len() == 2));
        let r = local_search_disks(&inst, 3).unwrap();
        assert_eq!(r.solution.chosen.len(), 1);
        assert_eq!(exact_pack(&h, u64::MAX, false).solution.weight, 1.0);
    }

    #[test]
    fn verifier_examples() {
        let inst = instance(&[(0.0, 0.0, 1.0), (5.0, 0.0, 1.0)], &[(0.0, 0.0), (5.0, 0.0)]);
        let w = verify_b_local_optimality(&inst, &[], 3).unwrap().unwrap();
        assert_eq!(w, Swap { removed: vec![], inserted: vec![0] });
        // Disk 0 blocks disks 1 and 2, which are compatible with each other.
        let inst = instance(&[(0.0, 0.0, 2.0), (-1.5, 0.0, 1.0), (1.5, 0.0, 1.0)], &[(-1.5, 0.0), (1.5, 0.0)]);
        let w = verify_b_local_optimality(&inst, &[0], 1).unwrap().unwrap();
        assert_eq!(w, Swap { removed: vec![0], inserted: vec![1, 2] });
        let h = inst.build_hypergraph::<f64>().unwrap().hypergraph;
        assert!(h.check_packing(&w.inserted, 1).unwrap().feasible);
        assert!(verify_b_local_optimality(&inst, &[1, 2], 1).unwrap().is_none());
        assert!(verify_b_local_optimality(&inst, &[0, 1], 1).is_err());
    }

    #[test]
    fn rejects_weighted_or_capacitated() {
        let mut inst = instance(&[(0.0, 0.0, 1.0)], &[(0.0, 0.0)]);
        inst.point_values[0] = 2.0;
        assert!(local_search_disks(&inst, 3).is_err());
        assert!(local_search_disks(&instance(&[], &[]), 5).is_err());
    }

    #[test]
    fn pruning_drops_supersets() {
        let inst = instance(&[(0.0, 0.0, 3.0), (0.0, 0.0, 1.0), (9.0, 9.0, 0.5)], &[(0.0, 0.0), (2.0, 0.0)]);
        let r = local_search_disks(&inst, 2).unwrap();
        assert_eq!(r.pruned, vec![0]);
        assert_eq!(r.solution.chosen, vec![1, 2]);
    }

    #[test]
    fn random_instances_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, 12, 20);
            let r = local_search_disks(&inst, 3).unwrap();
            assert!(r.solution.feasible);
            assert!(r.swaps.len() <= 12);
            assert!(verify_b_local_optimality(&inst, &r.solution.chosen, 3).unwrap().is_none());
            let h = inst.build_hypergraph::<f64>().unwrap().hypergraph;
            let opt = exact_pack(&h, u64::MAX, false).solution.weight;
            assert!(r.solution.weight >= 0.75 * opt, "{} vs {opt}", r.solution.weight);
        }
    }

    #[test]
    fn local_and_optimal_conflicts_are_sparse() {
        // Two independent families of disks conflict along a planar graph,
        // so the conflict edges obey |E| <= 3|V| - 6.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let inst = random_instance(&mut rng, 14, 40);
            let h = inst.build_hypergraph::<f64>().unwrap().hypergraph;
            let local = local_search_disks(&inst, 2).unwrap().solution.chosen;
            let opt = exact_pack(&h, u64::MAX, false).solution.chosen;
            let c = Conflicts::new(&h);
            let mut vertices: Vec<usize> = local.iter().chain(&opt).copied().collect();
            vertices.sort_unstable();
            vertices.dedup();
            let edges = local.iter().flat_map(|&a| opt.iter().map(move |&o| (a, o))).filter(|&(a, o)| a != o && c.conflict(a, o)).count();
            if vertices.len() >= 3 {
                assert!(edges <= 3 * vertices.len() - 6);
            }
        }
    }
}
