//! Multi-layer interval trees for packing rectangles and boxes into points.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Direction, GeometricInstance, Region};
use crate::hypergraph::{Hypergraph, PackingSolution};
use crate::rounding::{pack_hypergraph, SolverConfig};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct TreePackReport<T> {
    /// Vertices are region indices of the instance.
    pub solution: PackingSolution<T>,
    /// Weight of every level of the outermost tree.
    pub level_weights: Vec<T>,
    /// Number of pipeline calls, one per innermost node.
    pub leaf_calls: usize,
}

/// Packs rectangles (regions) into capacitated points with a single interval
/// tree on the x axis. Every node's rectangles share a vertical line.
pub fn pack_rects_into_points<T: Scalar>(inst: &GeometricInstance<T>, config: &SolverConfig) -> Result<TreePackReport<T>> {
    let intervals = extract(inst, 2, |r| match r {
        Region::Rect(b) => Some(vec![(b.min.x, b.max.x), (b.min.y, b.max.y)]),
        _ => None,
    })?;
    run(inst, intervals, 1, config)
}

/// Packs boxes into capacitated points with x, y and z trees nested inside
/// each other. Innermost nodes hold boxes sharing a common point.
pub fn pack_boxes_into_points<T: Scalar>(inst: &GeometricInstance<T>, config: &SolverConfig) -> Result<TreePackReport<T>> {
    let intervals = extract(inst, 3, |r| match r {
        Region::Box(b) => Some(vec![(b.min.x, b.max.x), (b.min.y, b.max.y), (b.min.z, b.max.z)]),
        _ => None,
    })?;
    run(inst, intervals, 3, config)
}

type Intervals<T> = Vec<Vec<(T, T)>>;

fn extract<T: Scalar>(
    inst: &GeometricInstance<T>,
    dims: usize,
    f: impl Fn(&Region<T>) -> Option<Vec<(T, T)>>,
) -> Result<Intervals<T>> {
    if inst.direction != Direction::PackRegions {
        return Err(Error::InvalidInstance("interval trees need a pack-regions instance".into()));
    }
    inst.regions
        .iter()
        .map(|r| f(r).ok_or_else(|| Error::InvalidInstance(format!("expected {dims}D axis-parallel regions only"))))
        .collect()
}

fn run<T: Scalar>(inst: &GeometricInstance<T>, iv: Intervals<T>, layers: usize, config: &SolverConfig) -> Result<TreePackReport<T>> {
    let h = inst.build_hypergraph::<T>()?.hypergraph;
    let config = SolverConfig { gamma_value: 1.0, ..config.clone() };
    let ctx = Ctx { h: &h, iv: &iv, layers, config: &config };
    // Regions outside every binding point constraint are always kept.
    let binding = h.binding_part();
    let (tied, free): (Vec<usize>, Vec<usize>) = (0..h.num_vertices()).partition(|&v| !binding.incident(v).is_empty());
    let out = ctx.solve(&tied, 0)?;
    let mut chosen = out.chosen;
    chosen.extend(free);
    let solution = h.check_packing(&chosen, 1)?;
    if !solution.feasible {
        return Err(Error::Infeasible("interval tree union violates a capacity".into()));
    }
    Ok(TreePackReport { solution, level_weights: out.level_weights, leaf_calls: out.leaf_calls })
}

struct Ctx<'a, T> {
    h: &'a Hypergraph<T>,
    iv: &'a Intervals<T>,
    layers: usize,
    config: &'a SolverConfig,
}

struct Layered<T> {
    chosen: Vec<usize>,
    level_weights: Vec<T>,
    leaf_calls: usize,
}

impl<T: Scalar> Ctx<'_, T> {
    /// Splits `items` into tree levels along `axis`. Each level lists its
    /// nodes left to right; each node lists the items stabbed by its median.
    fn levels(&self, items: &[usize], axis: usize) -> Vec<Vec<Vec<usize>>> {
        let mut levels: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut frontier = vec![items.to_vec()];
        while !frontier.is_empty() {
            let mut nodes = Vec::new();
            let mut next = Vec::new();
            for set in frontier {
                let mut lows: Vec<T> = set.iter().map(|&i| self.iv[i][axis].0).collect();
                lows.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
                let max_low = *lows.last().expect("nonempty");
                let min_high = set.iter().map(|&i| self.iv[i][axis].1).fold(T::infinity(), T::min);
                // One coordinate stabbing everything makes a single node.
                let split = if max_low <= min_high { max_low } else { lows[(lows.len() - 1) / 2] };
                let (mut left, mut right, mut stabbed) = (Vec::new(), Vec::new(), Vec::new());
                for &i in &set {
                    let (lo, hi) = self.iv[i][axis];
                    if hi < split {
                        left.push(i);
                    } else if lo > split {
                        right.push(i);
                    } else {
                        stabbed.push(i);
                    }
                }
                nodes.push(stabbed);
                next.extend([left, right].into_iter().filter(|s| !s.is_empty()));
            }
            levels.push(nodes);
            frontier = next;
        }
        levels
    }

    fn leaf(&self, items: &[usize]) -> Result<Vec<usize>> {
        let sub = self.h.induced(items)?;
        let report = pack_hypergraph(&sub.hypergraph, self.config)?;
        Ok(report.solution.chosen.iter().map(|&v| sub.index_map[v]).collect())
    }

    fn solve(&self, items: &[usize], axis: usize) -> Result<Layered<T>> {
        if items.is_empty() {
            return Ok(Layered { chosen: Vec::new(), level_weights: Vec::new(), leaf_calls: 0 });
        }
        let mut best: Option<(T, Vec<usize>)> = None;
        let mut level_weights = Vec::new();
        let mut leaf_calls = 0;
        for nodes in self.levels(items, axis) {
            let parts: Vec<(Vec<usize>, usize)> = nodes
                .par_iter()
                .map(|node| {
                    if axis + 1 == self.layers {
                        Ok((self.leaf(node)?, 1))
                    } else {
                        self.solve(node, axis + 1).map(|l| (l.chosen, l.leaf_calls))
                    }
                })
                .collect::<Result<_>>()?;
            self.check_disjoint(parts.iter().map(|p| p.0.as_slice()))?;
            let chosen: Vec<usize> = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
            leaf_calls += parts.iter().map(|p| p.1).sum::<usize>();
            let weight: T = chosen.iter().map(|&v| self.h.weight(v)).sum();
            level_weights.push(weight);
            if best.as_ref().is_none_or(|(w, _)| weight > *w) {
                best = Some((weight, chosen));
            }
        }
        let (_, chosen) = best.expect("at least one level");
        Ok(Layered { chosen, level_weights, leaf_calls })
    }

    /// Solutions of different nodes on one level must not share a point.
    fn check_disjoint<'b>(&self, parts: impl Iterator<Item = &'b [usize]>) -> Result<()> {
        let mut owner = vec![usize::MAX; self.h.num_edges()];
        for (node, part) in parts.enumerate() {
            for &v in part {
                for &e in self.h.incident(v) {
                    if owner[e] != usize::MAX && owner[e] != node {
                        return Err(Error::Infeasible(format!("nodes {} and {node} share point edge {e}", owner[e])));
                    }
                    owner[e] = node;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box3, ClassTag, Point, Point2, Point3, Rect};
    use crate::oracle::exact_pack;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Region<f64> {
        Region::Rect(Rect::new(Point2::new(x0, y0), Point2::new(x1, y1)).unwrap())
    }

    fn rect_instance(regions: Vec<Region<f64>>, points: Vec<(f64, f64, f64)>) -> GeometricInstance<f64> {
        let n = regions.len();
        GeometricInstance::new(
            Direction::PackRegions,
            points.iter().map(|&(x, y, _)| Point::Planar(Point2::new(x, y))).collect(),
            points.iter().map(|p| p.2).collect(),
            regions,
            vec![1.0; n],
            ClassTag::Generic,
        )
        .unwrap()
    }

    #[test]
    fn common_line_is_one_node() {
        let inst = rect_instance(vec![rect(0.0, 0.0, 2.0, 1.0), rect(1.0, 0.5, 3.0, 2.0), rect(0.5, 3.0, 1.5, 4.0)], vec![(1.2, 0.7, 1.0)]);
        let r = pack_rects_into_points(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(r.leaf_calls, 1);
        assert_eq!(r.level_weights.len(), 1);
        assert_eq!(r.solution.weight, 2.0);
    }

    #[test]
    fn disjoint_rects_without_points() {
        let inst = rect_instance(vec![rect(0.0, 0.0, 1.0, 1.0), rect(2.0, 0.0, 3.0, 1.0)], vec![]);
        let r = pack_rects_into_points(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(r.leaf_calls, 0);
        assert_eq!(r.solution.chosen, vec![0, 1]);
        assert_eq!(r.solution.weight, 2.0);
    }

    #[test]
    fn boxes_sharing_a_point_and_separated_boxes() {
        let b = |lo: [f64; 3], hi: [f64; 3]| {
            Region::Box(Box3::new(Point3::new(lo[0], lo[1], lo[2]), Point3::new(hi[0], hi[1], hi[2])).unwrap())
        };
        let shared = GeometricInstance::new(
            Direction::PackRegions,
            vec![Point::Spatial(Point3::new(0.5, 0.5, 0.5))],
            vec![1.0],
            vec![b([0.0; 3], [1.0; 3]), b([0.2; 3], [2.0; 3])],
            vec![1.0, 3.0],
            ClassTag::Generic,
        )
        .unwrap();
        let r = pack_boxes_into_points(&shared, &SolverConfig::default()).unwrap();
        assert_eq!(r.leaf_calls, 1);
        assert_eq!(r.solution.chosen, vec![1]);
        let apart = GeometricInstance::new(
            Direction::PackRegions,
            vec![],
            vec![],
            vec![b([0.0; 3], [1.0; 3]), b([5.0, 0.0, 0.0], [6.0, 1.0, 1.0])],
            vec![1.0, 1.0],
            ClassTag::Generic,
        )
        .unwrap();
        let r = pack_boxes_into_points(&apart, &SolverConfig::default()).unwrap();
        assert_eq!(r.solution.weight, 2.0);
    }

    #[test]
    fn rejects_wrong_regions() {
        let mut inst = rect_instance(vec![rect(0.0, 0.0, 1.0, 1.0)], vec![]);
        assert!(pack_boxes_into_points(&inst, &SolverConfig::default()).is_err());
        inst.direction = Direction::PackPoints;
        assert!(pack_rects_into_points(&inst, &SolverConfig::default()).is_err());
    }

    #[test]
    fn random_rects_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let regions = (0..8)
                .map(|_| {
                    let (x, y) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
                    rect(x, y, x + rng.gen_range(0.5..5.0), y + rng.gen_range(0.5..5.0))
                })
                .collect();
            let points = (0..12).map(|_| (rng.gen_range(0.0..12.0), rng.gen_range(0.0..12.0), rng.gen_range(1..=2) as f64)).collect();
            let inst = rect_instance(regions, points);
            let r = pack_rects_into_points(&inst, &SolverConfig::default()).unwrap();
            assert!(r.solution.feasible);
            let h = inst.build_hypergraph::<f64>().unwrap().hypergraph;
            let opt = exact_pack(&h, u64::MAX, false).solution.weight;
            assert!(r.solution.weight >= opt / (4.0 * 3.0), "{} vs {opt}", r.solution.weight);
        }
    }

    #[test]
    fn random_boxes_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let regions: Vec<Region<f64>> = (0..6)
                .map(|_| {
                    let lo: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..6.0));
                    let hi = lo.map(|v| v + rng.gen_range(0.5..4.0));
                    Region::Box(Box3::new(Point3::new(lo[0], lo[1], lo[2]), Point3::new(hi[0], hi[1], hi[2])).unwrap())
                })
                .collect();
            let points: Vec<Point<f64>> =
                (0..10).map(|_| Point::Spatial(Point3::new(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)))).collect();
            let inst =
                GeometricInstance::new(Direction::PackRegions, points, vec![1.0; 10], regions, vec![1.0; 6], ClassTag::Generic).unwrap();
            let r = pack_boxes_into_points(&inst, &SolverConfig::default()).unwrap();
            assert!(r.solution.feasible);
            let h = inst.build_hypergraph::<f64>().unwrap().hypergraph;
            let opt = exact_pack(&h, u64::MAX, false).solution.weight;
            assert!(r.solution.weight >= opt / (4.0f64 * 3.0).powi(3));
            assert!(r.solution.weight >= 1.0);
        }
    }
}
