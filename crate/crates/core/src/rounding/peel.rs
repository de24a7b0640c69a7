//! Uniform capacity `k` reduced to `k` rounds of unit-capacity packing.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, PackingSolution};
use crate::scalar::Scalar;

/// Runs `k` rounds; round `i` asks `subsolver` for an independent set (all
/// capacities 1) of the sub-hypergraph induced by the vertices not yet taken.
/// The subsolver answers in the induced instance's indices.
pub fn uniform_capacity_peel<T, F>(h: &Hypergraph<T>, mut subsolver: F) -> Result<PackingSolution<T>>
where
    T: Scalar,
    F: FnMut(&Hypergraph<T>) -> Result<Vec<usize>>,
{
    let k = match h.edges().first() {
        None => 1,
        Some(e) => e.capacity,
    };
    if h.edges().iter().any(|e| e.capacity != k) {
        return Err(Error::NonUniformCapacity);
    }
    let mut taken = vec![false; h.num_vertices()];
    for _ in 0..k {
        let remaining: Vec<usize> = (0..h.num_vertices()).filter(|&v| !taken[v]).collect();
        if remaining.is_empty() {
            break;
        }
        let sub = h.induced(&remaining)?;
        let unit = sub.hypergraph.with_unit_capacities();
        let picked = subsolver(&unit)?;
        if !unit.check_packing(&picked, 1)?.feasible {
            return Err(Error::Infeasible("subsolver returned a non-independent set".into()));
        }
        for v in picked {
            taken[sub.index_map[v]] = true;
        }
    }
    let chosen: Vec<usize> = (0..h.num_vertices()).filter(|&v| taken[v]).collect();
    let sol = h.check_packing(&chosen, 1)?;
    if !sol.feasible {
        return Err(Error::Infeasible("peeling exceeded a capacity".into()));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hyperedge;
    use crate::oracle::exact_pack;

    fn exact(h: &Hypergraph<f64>) -> Result<Vec<usize>> {
        Ok(exact_pack(h, u64::MAX, false).solution.chosen)
    }

    #[test]
    fn k3_capacity_two() {
        let edges = vec![Hyperedge::new(vec![0, 1], 2), Hyperedge::new(vec![0, 2], 2), Hyperedge::new(vec![1, 2], 2)];
        let h = Hypergraph::new(vec![1.0; 3], edges).unwrap();
        let mut calls = 0;
        let sol = uniform_capacity_peel(&h, |g| {
            calls += 1;
            exact(g)
        })
        .unwrap();
        assert!(sol.weight >= 2.0);
        assert_eq!(calls, 2);
    }

    #[test]
    fn unit_capacity_is_one_call() {
        let h = Hypergraph::new(vec![1.0; 2], vec![Hyperedge::new(vec![0, 1], 1)]).unwrap();
        let mut calls = 0;
        let sol = uniform_capacity_peel(&h, |g| {
            calls += 1;
            exact(g)
        })
        .unwrap();
        assert_eq!((calls, sol.weight), (1, 1.0));
    }

    #[test]
    fn empty_and_non_uniform() {
        let h = Hypergraph::<f64>::new(vec![], vec![]).unwrap();
        assert!(uniform_capacity_peel(&h, exact).unwrap().chosen.is_empty());
        let edges = vec![Hyperedge::new(vec![0], 1), Hyperedge::new(vec![0], 2)];
        let h = Hypergraph::new(vec![1.0], edges).unwrap();
        assert!(matches!(uniform_capacity_peel(&h, exact), Err(Error::NonUniformCapacity)));
    }

    #[test]
    fn rejects_bad_subsolver() {
        let h = Hypergraph::new(vec![1.0; 2], vec![Hyperedge::new(vec![0, 1], 1)]).unwrap();
        assert!(uniform_capacity_peel(&h, |_| Ok(vec![0, 1])).is_err());
    }
}
