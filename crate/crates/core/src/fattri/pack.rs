//! Packing capacitated points into fat triangles with loads up to
//! `max(9, cap)`.

use serde::{Deserialize, Serialize};

use super::{cover_triangle_by_measure, CanonicalFatRegions, FatCover, DEFAULT_ROTATIONS};
use crate::error::{Error, Result};
use crate::geometry::{Direction, GeometricInstance, Point2, Region, Triangle};
use crate::hypergraph::{Hyperedge, Hypergraph};
use crate::lp::build_and_solve_lp;
use crate::rect::{independent_owners, replicate, sparsify_unit, BicriteriaReport};
use crate::rounding::SolverConfig;
use crate::scalar::Scalar;

/// Mass above which a triangle is covered by lighter pieces.
pub const PIECE_MASS: f64 = 4.0 * 18.0 * 9.0;
pub const FAT_BETA: u32 = 9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FatOptions {
    /// Largest accepted triangle fatness.
    pub alpha_max: f64,
    /// Rotations per canonical shape family.
    pub rotations: usize,
}

impl Default for FatOptions {
    fn default() -> Self {
        FatOptions { alpha_max: 4.0, rotations: DEFAULT_ROTATIONS }
    }
}

pub fn pack_points_into_fat_triangles<T: Scalar>(
    inst: &GeometricInstance<T>,
    config: &SolverConfig,
    opts: &FatOptions,
) -> Result<BicriteriaReport<T>> {
    config.validate()?;
    if inst.direction != Direction::PackPoints {
        return Err(Error::InvalidInstance("expected a pack-points instance".into()));
    }
    let mut triangles = Vec::with_capacity(inst.regions.len());
    for r in &inst.regions {
        let Region::Triangle(t) = r else {
            return Err(Error::InvalidInstance("expected triangles only".into()));
        };
        if t.fatness().as_f64() > opts.alpha_max {
            return Err(Error::InvalidInstance(format!("triangle fatness {} exceeds {}", t.fatness(), opts.alpha_max)));
        }
        triangles.push(t);
    }
    let pts: Vec<Point2<T>> = inst
        .points
        .iter()
        .map(|p| p.planar().cloned().ok_or_else(|| Error::InvalidInstance("expected planar points".into())))
        .collect::<Result<_>>()?;
    let built = inst.build_hypergraph::<T>()?;
    let h = &built.hypergraph;
    let lp = build_and_solve_lp(h, config.lp_tol)?;
    let n = pts.len();

    let mut pieces: Vec<(Vec<usize>, Triangle<T>)> = Vec::new();
    for (e, edge) in h.edges().iter().enumerate() {
        if edge.len() <= edge.capacity as usize {
            continue;
        }
        let t = triangles[built.edge_source[e]];
        let mu: f64 = edge.vertices.iter().map(|&v| lp.values[v].as_f64()).sum();
        if mu <= PIECE_MASS {
            pieces.push((edge.vertices.clone(), t.clone()));
            continue;
        }
        let k = (mu / PIECE_MASS).ceil() as usize;
        let mass: Vec<(Point2<T>, T)> = edge.vertices.iter().map(|&v| (pts[v].clone(), lp.values[v])).collect();
        for piece in cover_triangle_by_measure(t, &mass, k)?.pieces {
            let members: Vec<usize> = edge.vertices.iter().copied().filter(|&v| piece.triangle.contains(&pts[v])).collect();
            if !members.is_empty() {
                pieces.push((members, piece.triangle));
            }
        }
    }
    let unit = Hypergraph::new(h.weights().to_vec(), pieces.iter().map(|(m, _)| Hyperedge::new(m.clone(), 1)).collect())?;
    let constrained: Vec<bool> = (0..n).map(|v| !unit.incident(v).is_empty()).collect();
    let (m, sparsify_success, mut multiplicity) = if pieces.is_empty() {
        (1, true, vec![0; n])
    } else {
        let s = sparsify_unit(&unit, config)?;
        (s.m, s.success, s.multiplicity)
    };
    for v in 0..n {
        if !constrained[v] {
            multiplicity[v] = 0;
        }
    }
    let (owner, first) = replicate(&multiplicity);

    // Canonical regions live on the support points; a region's clique spans
    // all copies of its members, as if the copies sat on their owner.
    let support: Vec<usize> = (0..n).filter(|&v| multiplicity[v] > 0).collect();
    let copies_of = |v: usize| first[v]..first[v] + multiplicity[v] as usize;
    let mut k = 1;
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    if !support.is_empty() {
        let in_support = |members: &[usize]| members.iter().filter(|&&v| multiplicity[v] > 0).count();
        k = pieces.iter().map(|(members, _)| in_support(members)).max().unwrap_or(1).max(1);
        let canon = CanonicalFatRegions::with_rotations(support.iter().map(|&v| pts[v].clone()).collect(), k, opts.alpha_max, opts.rotations)?;
        for (members, tri) in &pieces {
            match canon.cover(tri) {
                FatCover::Covered(regions) => {
                    for r in regions {
                        cliques.push(r.members.iter().flat_map(|&s| copies_of(support[s])).collect());
                    }
                }
                FatCover::NotCovered | FatCover::TooManyPoints => {
                    log::debug!("piece without a canonical cover; using one clique");
                    cliques.push(members.iter().flat_map(|&v| copies_of(v)).collect());
                }
            }
        }
    }
    let mut chosen = independent_owners(h.weights(), &owner, &cliques)?;
    chosen.extend((0..n).filter(|&v| !constrained[v]));
    let solution = h.check_packing(&chosen, FAT_BETA)?;
    if !solution.feasible {
        return Err(Error::Infeasible("a triangle holds more than max(9, cap) chosen points".into()));
    }
    Ok(BicriteriaReport { solution, lp_objective: lp.objective, pieces: pieces.len(), copies: owner.len(), m, k, sparsify_success })
}
