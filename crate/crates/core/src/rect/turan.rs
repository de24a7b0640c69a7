//! Greedy weighted independent set.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Repeatedly takes the live vertex maximizing `w / (deg + 1)` (degree in
/// the live graph, ties to the lowest index) and deletes its closed
/// neighbourhood. The result weighs at least `sum w_v / (deg_v + 1)`.
pub fn turan_weighted_is<T: Scalar>(weights: &[T], edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let n = weights.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidInstance(format!("bad graph edge ({a}, {b})")));
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut chosen = Vec::new();
    loop {
        let mut best: Option<(usize, T)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let ratio = weights[v] / T::from_float((degree[v] + 1) as f64);
            if best.is_none_or(|(_, r)| ratio > r) {
                best = Some((v, ratio));
            }
        }
        let Some((v, _)) = best else { break };
        chosen.push(v);
        let mut removed = vec![v];
        removed.extend(adj[v].iter().copied().filter(|&u| alive[u]));
        for &u in &removed {
            alive[u] = false;
        }
        for &u in &removed {
            for &z in &adj[u] {
                if alive[z] {
                    degree[z] -= 1;
                }
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}
