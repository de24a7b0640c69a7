//! The packing LP: maximize `sum w_v x_v` subject to `x(h) <= cap(h)` and
//! `0 <= x <= 1`.
//!
//! Solved with a dense bounded-variable primal simplex. Slack columns start
//! as the basis, which is feasible because every capacity is positive. Dantzig
//! pricing is used until a run of degenerate pivots, then Bland's rule takes
//! over for the rest of the solve so cycling cannot occur.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::scalar::Scalar;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution<T> {
    pub values: Vec<T>,
    pub objective: T,
    pub energy: T,
    /// `max_h (x(h) - cap(h))`; non-positive for a feasible point.
    pub feasibility_slack: T,
}

impl<T: Scalar> FractionalSolution<T> {
    /// Wraps given values, recomputing objective, energy and slack.
    pub fn from_values(h: &Hypergraph<T>, values: Vec<T>) -> Self {
        let objective = values.iter().zip(h.weights()).map(|(&x, &w)| x * w).sum();
        let energy = values.iter().copied().sum();
        let feasibility_slack = h
            .edges()
            .iter()
            .map(|e| e.vertices.iter().map(|&v| values[v]).sum::<T>() - T::from_float(e.capacity as f64))
            .fold(T::neg_infinity(), T::max);
        FractionalSolution { values, objective, energy, feasibility_slack }
    }

    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn energy_of(&self, subset: &[usize]) -> T {
        subset.iter().map(|&v| self.values[v]).sum()
    }
}

/// Solves the LP relaxation of `h` to tolerance `tol`.
pub fn build_and_solve_lp<T: Scalar>(h: &Hypergraph<T>, tol: f64) -> Result<FractionalSolution<T>> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidConfig(format!("LP tolerance {tol} outside (0, 1e-3]")));
    }
    let rows = binding_rows(h);
    let mut simplex = Simplex::new(h, &rows, tol);
    let outcome = simplex.run();
    let values: Vec<T> = simplex.primal().into_iter().map(|x| x.max(T::zero()).min(T::one())).collect();
    if let Err(reason) = outcome {
        return Err(Error::LpUnsolved { reason, best: values.iter().map(|x| x.as_f64()).collect() });
    }
    let sol = FractionalSolution::from_values(h, values);
    if sol.energy < T::one() && h.num_vertices() > 0 {
        log::warn!("LP energy {} is below 1", sol.energy);
    }
    Ok(sol)
}

/// Distinct vertex sets of binding edges, each with its smallest capacity.
fn binding_rows<T: Scalar>(h: &Hypergraph<T>) -> Vec<(Vec<usize>, u32)> {
    let mut best: HashMap<&[usize], u32> = HashMap::new();
    let mut order = Vec::new();
    for e in h.edges().iter().filter(|e| e.is_binding()) {
        match best.get_mut(e.vertices.as_slice()) {
            Some(cap) => *cap = (*cap).min(e.capacity),
            None => {
                best.insert(&e.vertices, e.capacity);
                order.push(e.vertices.as_slice());
            }
        }
    }
    order.into_iter().map(|v| (v.to_vec(), best[v])).collect()
}

struct Simplex<T> {
    m: usize,
    n: usize,
    /// Row-major `m x (n + m)` tableau `B^{-1} A`.
    tab: Vec<T>,
    /// Reduced costs of every column.
    cost: Vec<T>,
    /// Values of the basic variables.
    beta: Vec<T>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    at_upper: Vec<bool>,
    tol: T,
}

enum Step {
    Optimal,
    Moved { degenerate: bool },
}

impl<T: Scalar> Simplex<T> {
    fn new(h: &Hypergraph<T>, rows: &[(Vec<usize>, u32)], tol: f64) -> Self {
        let n = h.num_vertices();
        let m = rows.len();
        let width = n + m;
        let mut tab = vec![T::zero(); m * width];
        let mut beta = Vec::with_capacity(m);
        for (i, (verts, cap)) in rows.iter().enumerate() {
            for &v in verts {
                tab[i * width + v] = T::one();
            }
            tab[i * width + n + i] = T::one();
            beta.push(T::from_float(*cap as f64));
        }
        let mut cost = h.weights().to_vec();
        cost.resize(width, T::zero());
        let tol = T::from_float(tol).max(T::epsilon() * T::from_float(64.0));
        let mut in_basis = vec![false; width];
        in_basis[n..].iter_mut().for_each(|b| *b = true);
        Simplex {
            m,
            n,
            tab,
            cost,
            beta,
            basis: (n..width).collect(),
            in_basis,
            at_upper: vec![false; width],
            tol,
        }
    }

    fn width(&self) -> usize {
        self.n + self.m
    }

    fn upper(&self, j: usize) -> T {
        if j < self.n {
            T::one()
        } else {
            T::infinity()
        }
    }

    fn run(&mut self) -> std::result::Result<(), String> {
        let limit = 50 * (self.width() + 10);
        let mut bland = false;
        let mut degenerate_run = 0;
        for _ in 0..limit {
            match self.step(bland) {
                Step::Optimal => return Ok(()),
                Step::Moved { degenerate } => {
                    degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
                    if degenerate_run > 50 {
                        bland = true;
                    }
                }
            }
        }
        Err(format!("iteration limit {limit} reached"))
    }

    fn entering(&self, bland: bool) -> Option<(usize, T)> {
        let mut pick: Option<(usize, T)> = None;
        for j in 0..self.width() {
            if self.in_basis[j] {
                continue;
            }
            let d = self.cost[j];
            let dir = if !self.at_upper[j] && d > self.tol {
                T::one()
            } else if self.at_upper[j] && d < -self.tol {
                -T::one()
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if pick.is_none_or(|(p, _)| d.abs() > self.cost[p].abs()) {
                pick = Some((j, dir));
            }
        }
        pick
    }

    fn step(&mut self, bland: bool) -> Step {
        let Some((j, dir)) = self.entering(bland) else {
            return Step::Optimal;
        };
        let w = self.width();
        let pivot_eps = self.tol;
        // Ratio test: the entering variable moves by theta * dir.
        let mut theta = self.upper(j);
        let mut leave: Option<(usize, bool)> = None;
        for i in 0..self.m {
            let a = dir * self.tab[i * w + j];
            let b = self.basis[i];
            let (limit, to_upper) = if a > pivot_eps {
                (self.beta[i] / a, false)
            } else if a < -pivot_eps && self.upper(b).is_finite() {
                ((self.upper(b) - self.beta[i]) / -a, true)
            } else {
                continue;
            };
            let limit = limit.max(T::zero());
            let better = match leave {
                None => limit < theta,
                Some((r, _)) => limit < theta || (bland && limit == theta && self.basis[i] < self.basis[r]),
            };
            if better {
                theta = limit;
                leave = Some((i, to_upper));
            }
        }
        assert!(theta.is_finite(), "packing LP is bounded");
        for i in 0..self.m {
            let a = self.tab[i * w + j];
            self.beta[i] = self.beta[i] - theta * dir * a;
        }
        let degenerate = theta <= self.tol;
        match leave {
            None => {
                self.at_upper[j] = !self.at_upper[j];
            }
            Some((r, to_upper)) => {
                let start = if self.at_upper[j] { self.upper(j) } else { T::zero() };
                let leaving = self.basis[r];
                self.pivot(r, j);
                self.beta[r] = start + dir * theta;
                self.in_basis[leaving] = false;
                self.at_upper[leaving] = to_upper;
                self.in_basis[j] = true;
                self.at_upper[j] = false;
                self.basis[r] = j;
            }
        }
        Step::Moved { degenerate }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width();
        let p = self.tab[r * w + j];
        for c in 0..w {
            self.tab[r * w + c] = self.tab[r * w + c] / p;
        }
        let (before, rest) = self.tab.split_at_mut(r * w);
        let (row, after) = rest.split_at_mut(w);
        for other in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = other[j];
            if f != T::zero() {
                for c in 0..w {
                    other[c] = other[c] - f * row[c];
                }
            }
        }
        let f = self.cost[j];
        for c in 0..w {
            self.cost[c] = self.cost[c] - f * row[c];
        }
    }

    fn primal(&self) -> Vec<T> {
        let mut x: Vec<T> = (0..self.n).map(|j| if self.at_upper[j] { T::one() } else { T::zero() }).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.beta[i];
            }
        }
        x
    }
}

/// Writes the LP in CPLEX LP text format.
pub fn write_lp_format<T: Scalar, W: Write>(h: &Hypergraph<T>, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "\\ packing LP, {} vertices, {} edges", h.num_vertices(), h.num_edges())?;
    writeln!(out, "Maximize")?;
    write!(out, " obj:")?;
    for (v, w) in h.weights().iter().enumerate() {
        write!(out, " + {} x{v}", w.as_f64())?;
    }
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for (e, edge) in h.edges().iter().enumerate() {
        let terms: Vec<String> = edge.vertices.iter().map(|v| format!("x{v}")).collect();
        writeln!(out, " e{e}: {} <= {}", terms.join(" + "), edge.capacity)?;
    }
    writeln!(out, "Bounds")?;
    for v in 0..h.num_vertices() {
        writeln!(out, " 0 <= x{v} <= 1")?;
    }
    writeln!(out, "End")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hyperedge;
    use proptest::prelude::*;

    fn k3() -> Hypergraph<f64> {
        let edges = vec![Hyperedge::new(vec![0, 1], 1), Hyperedge::new(vec![0, 2], 1), Hyperedge::new(vec![1, 2], 1)];
        Hypergraph::new(vec![1.0; 3], edges).unwrap()
    }

    #[test]
    fn k3_has_the_half_point() {
        let sol = build_and_solve_lp(&k3(), DEFAULT_TOL).unwrap();
        assert!((sol.objective - 1.5).abs() < 1e-9);
        for x in &sol.values {
            assert!((x - 0.5).abs() < 1e-9);
        }
        assert!((sol.energy_of(&[0]) - 0.5).abs() < 1e-9);
        assert_eq!(sol.energy_of(&[]), 0.0);
    }

    #[test]
    fn box_only_and_non_binding() {
        let h = Hypergraph::new(vec![2.0, 5.0], vec![]).unwrap();
        let sol = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
        assert_eq!(sol.values, vec![1.0, 1.0]);
        assert_eq!(sol.objective, 7.0);
        let h = Hypergraph::new(vec![1.0, 1.0], vec![Hyperedge::new(vec![0, 1], 2)]).unwrap();
        let sol = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
        assert_eq!(sol.objective, 2.0);
    }

    #[test]
    fn works_in_f32() {
        let sol = build_and_solve_lp(&k3().cast::<f32>(), 1e-6).unwrap();
        assert!((sol.objective - 1.5).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(build_and_solve_lp(&k3(), 0.0).is_err());
        assert!(build_and_solve_lp(&k3(), 0.1).is_err());
    }

    #[test]
    fn lp_dump_lists_rows() {
        let mut buf = Vec::new();
        write_lp_format(&k3(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("e2: x1 + x2 <= 1"));
        assert!(text.contains("0 <= x2 <= 1"));
    }

    fn arb_hypergraph(max_n: usize) -> impl Strategy<Value = Hypergraph<f64>> {
        (1usize..max_n).prop_flat_map(|n| {
            let edge = (proptest::collection::btree_set(0..n, 1..=n), 1u32..4)
                .prop_map(|(s, c)| Hyperedge::new(s.into_iter().collect(), c));
            (proptest::collection::vec(0.0f64..10.0, n), proptest::collection::vec(edge, 0..10))
                .prop_map(|(w, e)| Hypergraph::new(w, e).unwrap())
        })
    }

    fn best_integral(h: &Hypergraph<f64>) -> f64 {
        let n = h.num_vertices();
        (0u32..1 << n)
            .map(|mask| (0..n).filter(|v| mask >> v & 1 == 1).collect::<Vec<_>>())
            .filter_map(|s| {
                let sol = h.check_packing(&s, 1).unwrap();
                sol.feasible.then_some(sol.weight)
            })
            .fold(0.0, f64::max)
    }

    /// Independent optimum: best feasible basic solution, found by making
    /// every n-subset of the constraints (edges and bounds) tight.
    fn vertex_enumeration(h: &Hypergraph<f64>) -> f64 {
        let n = h.num_vertices();
        let mut rows: Vec<(Vec<f64>, f64)> = h
            .edges()
            .iter()
            .map(|e| {
                let mut a = vec![0.0; n];
                e.vertices.iter().for_each(|&v| a[v] = 1.0);
                (a, e.capacity as f64)
            })
            .collect();
        for v in 0..n {
            let mut a = vec![0.0; n];
            a[v] = 1.0;
            rows.push((a.clone(), 1.0));
            a[v] = -1.0;
            rows.push((a, 0.0));
        }
        let feasible = |x: &[f64]| {
            rows.iter().all(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-9)
        };
        let mut best = f64::NEG_INFINITY;
        let mut pick: Vec<usize> = (0..n).collect();
        loop {
            let mut m: Vec<Vec<f64>> = pick.iter().map(|&r| {
                let mut row = rows[r].0.clone();
                row.push(rows[r].1);
                row
            }).collect();
            if let Some(x) = gauss(&mut m, n) {
                if feasible(&x) {
                    best = best.max(x.iter().zip(h.weights()).map(|(p, q)| p * q).sum());
                }
            }
            let mut i = n;
            let total = rows.len();
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if pick[i] < total - n + i {
                    pick[i] += 1;
                    for j in i + 1..n {
                        pick[j] = pick[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn gauss(m: &mut [Vec<f64>], n: usize) -> Option<Vec<f64>> {
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
            if m[p][c].abs() < 1e-12 {
                return None;
            }
            m.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for k in c..=n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
        Some((0..n).map(|r| m[r][n] / m[r][r]).collect())
    }

    proptest! {
        #[test]
        fn feasible_and_dominates_integral(h in arb_hypergraph(12)) {
            let sol = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
            prop_assert!(sol.feasibility_slack <= 1e-8);
            prop_assert!(sol.values.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!(sol.objective >= best_integral(&h) - 1e-6);
        }

        #[test]
        fn objective_scales_with_weights(h in arb_hypergraph(12), lambda in 0.1f64..10.0) {
            let scaled_w: Vec<f64> = h.weights().iter().map(|w| w * lambda).collect();
            let scaled = Hypergraph::new(scaled_w, h.edges().to_vec()).unwrap();
            let a = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
            let b = build_and_solve_lp(&scaled, DEFAULT_TOL).unwrap();
            prop_assert!((a.objective * lambda - b.objective).abs() <= 1e-6 * (1.0 + b.objective));
        }

        #[test]
        fn matches_vertex_enumeration(h in arb_hypergraph(5)) {
            let sol = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
            let opt = vertex_enumeration(&h);
            prop_assert!((sol.objective - opt).abs() <= 1e-7 * (1.0 + opt), "{} vs {}", sol.objective, opt);
        }
    }
}
