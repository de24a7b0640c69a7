//! Exact packing by branch and bound, for validation at desk scale.

use crate::hypergraph::{Hyperedge, Hypergraph, PackingSolution};
use crate::lp::{build_and_solve_lp, DEFAULT_TOL};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct OracleResult<T> {
    pub solution: PackingSolution<T>,
    /// The search finished within budget, so `solution` is optimal.
    pub proven_optimal: bool,
    pub nodes: u64,
}

/// Depth-first include/exclude search over vertices in descending weight
/// order (ties by index), pruned by capacities and by the weight still
/// insertable. With `lp_bound`, the LP of the residual instance is used as an
/// extra bound at every node.
pub fn exact_pack<T: Scalar>(h: &Hypergraph<T>, node_budget: u64, lp_bound: bool) -> OracleResult<T> {
    let mut order: Vec<usize> = (0..h.num_vertices()).collect();
    order.sort_by(|&a, &b| h.weight(b).partial_cmp(&h.weight(a)).expect("finite weights").then(a.cmp(&b)));
    let mut search = Search {
        h,
        order,
        load: vec![0; h.num_edges()],
        current: Vec::new(),
        current_weight: T::zero(),
        best: Vec::new(),
        best_weight: T::zero(),
        nodes: 0,
        budget: node_budget,
        exhausted: false,
        lp_bound,
    };
    search.descend(0);
    let solution = h.check_packing(&search.best, 1).expect("indices in range");
    debug_assert!(solution.feasible);
    OracleResult { solution, proven_optimal: !search.exhausted, nodes: search.nodes }
}

struct Search<'a, T> {
    h: &'a Hypergraph<T>,
    order: Vec<usize>,
    load: Vec<u32>,
    current: Vec<usize>,
    current_weight: T,
    best: Vec<usize>,
    best_weight: T,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    lp_bound: bool,
}

impl<T: Scalar> Search<'_, T> {
    fn fits(&self, v: usize) -> bool {
        self.h.incident(v).iter().all(|&e| self.load[e] < self.h.edge(e).capacity)
    }

    fn bound(&self, depth: usize) -> T {
        let rest = &self.order[depth..];
        let greedy: T = rest.iter().filter(|&&v| self.fits(v)).map(|&v| self.h.weight(v)).sum();
        if !self.lp_bound || greedy <= T::zero() {
            return greedy;
        }
        greedy.min(self.residual_lp(rest))
    }

    fn residual_lp(&self, rest: &[usize]) -> T {
        let open: Vec<usize> = rest.iter().copied().filter(|&v| self.fits(v)).collect();
        let mut index = vec![usize::MAX; self.h.num_vertices()];
        for (i, &v) in open.iter().enumerate() {
            index[v] = i;
        }
        // Edges that still meet an open vertex have spare capacity, since a
        // vertex only fits when all its edges do.
        let edges = self
            .h
            .edges()
            .iter()
            .enumerate()
            .filter_map(|(e, edge)| {
                let vs: Vec<usize> = edge.vertices.iter().filter(|&&v| index[v] != usize::MAX).map(|&v| index[v]).collect();
                (!vs.is_empty()).then(|| Hyperedge::new(vs, edge.capacity - self.load[e]))
            })
            .collect();
        let weights = open.iter().map(|&v| self.h.weight(v)).collect();
        let lp = Hypergraph::new(weights, edges).and_then(|r| build_and_solve_lp(&r, DEFAULT_TOL));
        match lp {
            Ok(lp) => lp.objective + T::from_float(1e-7),
            Err(_) => T::infinity(),
        }
    }

    fn descend(&mut self, depth: usize) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if self.current_weight > self.best_weight {
            self.best_weight = self.current_weight;
            self.best = self.current.clone();
        }
        if depth == self.order.len() || self.current_weight + self.bound(depth) <= self.best_weight {
            return;
        }
        let v = self.order[depth];
        if self.fits(v) {
            self.h.incident(v).iter().for_each(|&e| self.load[e] += 1);
            self.current.push(v);
            self.current_weight = self.current_weight + self.h.weight(v);
            self.descend(depth + 1);
            self.current_weight = self.current_weight - self.h.weight(v);
            self.current.pop();
            self.h.incident(v).iter().for_each(|&e| self.load[e] -= 1);
        }
        self.descend(depth + 1);
    }
}
