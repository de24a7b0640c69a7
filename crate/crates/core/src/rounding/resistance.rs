//! Potentials, resistances and sampled violation estimates.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{Conflict, Hypergraph};
use crate::rng;
use crate::scalar::Scalar;

/// `prod_{v in c} x_v / rho`.
pub fn conflict_potential<T: Scalar>(c: &Conflict, x: &[T], rho: T) -> T {
    set_potential(&c.vertices, x, rho)
}

pub(crate) fn set_potential<T: Scalar>(set: &[usize], x: &[T], rho: T) -> T {
    set.iter().fold(T::one(), |acc, &v| acc * (x[v] / rho))
}

/// Potential of `set` with `skip` left out of the product.
fn partial_potential<T: Scalar>(set: &[usize], skip: usize, x: &[T], rho: T) -> T {
    set.iter().filter(|&&u| u != skip).fold(T::one(), |acc, &u| acc * (x[u] / rho))
}

fn membership(n: usize, members: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in members {
        mask[v] = true;
    }
    mask
}

/// Distinct conflict vertex sets inside `mask` that contain `v`.
fn conflicts_at<T: Scalar>(h: &Hypergraph<T>, v: usize, mask: &[bool], budget: usize) -> Result<Vec<Vec<usize>>> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for &e in h.incident(v) {
        let edge = h.edge(e);
        let pool: Vec<usize> = edge.vertices.iter().copied().filter(|&u| u != v && mask[u]).collect();
        let k = edge.capacity as usize;
        if pool.len() < k {
            continue;
        }
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let mut set: Vec<usize> = combo.iter().map(|&i| pool[i]).collect();
            set.push(v);
            set.sort_unstable();
            seen.insert(set);
            if seen.len() > budget {
                return Err(Error::ConflictBudget { budget });
            }
            if !advance(&mut combo, pool.len()) {
                break;
            }
        }
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

pub(crate) fn advance(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `(rho / x_v) * sum` of the potentials of the distinct conflicts inside
/// `members` that contain `v`. Zero when `x_v = 0`.
pub fn resistance<T: Scalar>(h: &Hypergraph<T>, v: usize, members: &[usize], x: &[T], rho: T, budget: usize) -> Result<T> {
    if x[v] <= T::zero() {
        return Ok(T::zero());
    }
    let mask = membership(h.num_vertices(), members);
    let sets = conflicts_at(h, v, &mask, budget)?;
    Ok(sets.iter().map(|c| partial_potential(c, v, x, rho)).sum())
}

/// Fraction of `samples` draws in which `v`, forced into the sample, ends up
/// in an over-full edge. Other members of `members` join with probability
/// `x_u / rho`.
pub fn estimate_violation_probability<T: Scalar>(
    h: &Hypergraph<T>,
    v: usize,
    members: &[usize],
    x: &[T],
    rho: T,
    samples: usize,
    seed: u64,
) -> f64 {
    let mask = membership(h.num_vertices(), members);
    estimate_with_mask(h, v, &mask, x, rho, samples, seed)
}

pub(crate) fn estimate_with_mask<T: Scalar>(
    h: &Hypergraph<T>,
    v: usize,
    mask: &[bool],
    x: &[T],
    rho: T,
    samples: usize,
    seed: u64,
) -> f64 {
    let incident = h.incident(v);
    if incident.is_empty() || samples == 0 {
        return 0.0;
    }
    let mut neighbours: Vec<usize> = incident
        .iter()
        .flat_map(|&e| h.edge(e).vertices.iter().copied())
        .filter(|&u| u != v && mask[u])
        .collect();
    neighbours.sort_unstable();
    neighbours.dedup();
    let probs: Vec<f64> = neighbours.iter().map(|&u| (x[u] / rho).as_f64().clamp(0.0, 1.0)).collect();
    let mut in_sample = vec![false; h.num_vertices()];
    let mut rng = rng::rng(seed, rng::stream::VIOLATION_SAMPLES, v as u64);
    let mut violated = 0usize;
    for _ in 0..samples {
        for (&u, &p) in neighbours.iter().zip(&probs) {
            in_sample[u] = rng.gen::<f64>() < p;
        }
        let bad = incident.iter().any(|&e| {
            let edge = h.edge(e);
            let load = 1 + edge.vertices.iter().filter(|&&u| u != v && in_sample[u]).count();
            load > edge.capacity as usize
        });
        violated += bad as usize;
    }
    violated as f64 / samples as f64
}

/// All distinct conflicts inside a vertex set, indexed by vertex, with the
/// ability to drop vertices and keep resistances current.
pub(crate) struct ConflictIndex<T> {
    sets: Vec<Vec<usize>>,
    alive: Vec<bool>,
    by_vertex: Vec<Vec<usize>>,
    pub resistance: Vec<T>,
}

impl<T: Scalar> ConflictIndex<T> {
    pub fn build(h: &Hypergraph<T>, x: &[T], rho: T, budget: usize) -> Result<Self> {
        let n = h.num_vertices();
        let all: Vec<usize> = (0..n).collect();
        let mut iter = h.conflicts(&all, budget);
        let mut sets: Vec<Vec<usize>> = iter.by_ref().map(|c| c.vertices).collect();
        if iter.truncated() {
            return Err(Error::ConflictBudget { budget });
        }
        sets.sort_unstable();
        sets.dedup();
        let mut by_vertex = vec![Vec::new(); n];
        for (i, s) in sets.iter().enumerate() {
            for &v in s {
                by_vertex[v].push(i);
            }
        }
        let mut index = ConflictIndex { alive: vec![true; sets.len()], sets, by_vertex, resistance: vec![T::zero(); n] };
        for v in 0..n {
            index.refresh(v, x, rho);
        }
        Ok(index)
    }

    fn refresh(&mut self, v: usize, x: &[T], rho: T) {
        self.resistance[v] = if x[v] <= T::zero() {
            T::zero()
        } else {
            self.by_vertex[v]
                .iter()
                .filter(|&&c| self.alive[c])
                .map(|&c| partial_potential(&self.sets[c], v, x, rho))
                .sum()
        };
    }

    /// Kills every conflict containing `u` and recomputes the resistances of
    /// the vertices that shared one with it.
    pub fn remove(&mut self, u: usize, x: &[T], rho: T) {
        let mut touched = Vec::new();
        for &c in &self.by_vertex[u] {
            if self.alive[c] {
                self.alive[c] = false;
                touched.extend(self.sets[c].iter().copied().filter(|&w| w != u));
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for w in touched {
            self.refresh(w, x, rho);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hyperedge;

    fn k3() -> Hypergraph<f64> {
        let edges = vec![Hyperedge::new(vec![0, 1], 1), Hyperedge::new(vec![0, 2], 1), Hyperedge::new(vec![1, 2], 1)];
        Hypergraph::new(vec![1.0; 3], edges).unwrap()
    }

    #[test]
    fn potential_examples() {
        let c = Conflict { vertices: vec![0, 1], witness_edge: 0, order: 1 };
        assert_eq!(conflict_potential(&c, &[0.5, 0.5], 1.0), 0.25);
        assert_eq!(conflict_potential(&c, &[0.5, 0.5], 2.0), 1.0 / 16.0);
        assert_eq!(conflict_potential(&c, &[0.0, 0.5], 1.0), 0.0);
    }

    #[test]
    fn resistance_examples() {
        let h = k3();
        let x = [0.5; 3];
        assert!((resistance(&h, 0, &[0, 1, 2], &x, 1.0, 100).unwrap() - 1.0).abs() < 1e-15);
        assert!((resistance(&h, 0, &[0, 1, 2], &x, 2.0, 100).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(resistance(&h, 0, &[0], &x, 1.0, 100).unwrap(), 0.0);
        assert_eq!(resistance(&h, 0, &[0, 1, 2], &[0.0, 0.5, 0.5], 1.0, 100).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_edges_count_once() {
        let edges = vec![Hyperedge::new(vec![0, 1], 1), Hyperedge::new(vec![0, 1], 1)];
        let h = Hypergraph::new(vec![1.0; 2], edges).unwrap();
        assert_eq!(resistance(&h, 0, &[0, 1], &[0.5, 0.5], 1.0, 100).unwrap(), 0.5);
    }

    #[test]
    fn budget_is_enforced() {
        let h = Hypergraph::new(vec![1.0; 6], vec![Hyperedge::new((0..6).collect(), 2)]).unwrap();
        assert!(matches!(
            resistance(&h, 0, &[0, 1, 2, 3, 4, 5], &[0.5; 6], 1.0, 3),
            Err(Error::ConflictBudget { .. })
        ));
    }

    #[test]
    fn violation_estimates() {
        let h = k3();
        let lonely = Hypergraph::new(vec![1.0], vec![]).unwrap();
        assert_eq!(estimate_violation_probability(&lonely, 0, &[0], &[1.0], 1.0, 50, 1), 0.0);
        assert_eq!(estimate_violation_probability(&h, 0, &[0, 1, 2], &[1.0; 3], 1.0, 200, 1), 1.0);
        // Exhaustive value over the four outcomes of the two neighbours: only
        // the empty outcome (probability 1/4) avoids a violation.
        let exact = 1.0 - 0.5 * 0.5;
        let est = estimate_violation_probability(&h, 0, &[0, 1, 2], &[0.5; 3], 1.0, 10_000, 7);
        assert!((est - exact).abs() <= 0.02, "{est}");
        let again = estimate_violation_probability(&h, 0, &[0, 1, 2], &[0.5; 3], 1.0, 10_000, 7);
        assert_eq!(est, again);
    }

    #[test]
    fn index_tracks_removals() {
        let h = k3();
        let x = [0.5; 3];
        let mut index = ConflictIndex::build(&h, &x, 1.0, 100).unwrap();
        assert_eq!(index.resistance, vec![1.0; 3]);
        index.remove(0, &x, 1.0);
        assert_eq!(index.resistance[1], 0.5);
        assert_eq!(index.resistance[2], 0.5);
        assert_eq!(resistance(&h, 1, &[1, 2], &x, 1.0, 100).unwrap(), 0.5);
    }
}
