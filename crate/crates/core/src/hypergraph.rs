//! Hypergraph data model, packing checks and conflict enumeration.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the number of conflicts a single enumeration may emit.
pub const DEFAULT_CONFLICT_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperedge {
    /// Sorted, duplicate-free vertex indices.
    pub vertices: Vec<usize>,
    pub capacity: u32,
}

impl Hyperedge {
    pub fn new(mut vertices: Vec<usize>, capacity: u32) -> Self {
        vertices.sort_unstable();
        Hyperedge { vertices, capacity }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// An edge with no more members than its capacity never constrains anything.
    pub fn is_binding(&self) -> bool {
        self.vertices.len() > self.capacity as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypergraph<T> {
    weights: Vec<T>,
    edges: Vec<Hyperedge>,
    incidence: Vec<Vec<usize>>,
    vertex_labels: Option<Vec<String>>,
    edge_labels: Option<Vec<String>>,
}

/// Result of [`Hypergraph::minimum_capacity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinCapacity {
    Bounded(u32),
    /// No edges: every vertex subset is feasible.
    Unconstrained,
}

impl fmt::Display for MinCapacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinCapacity::Bounded(k) => write!(f, "{k}"),
            MinCapacity::Unconstrained => f.write_str("unconstrained"),
        }
    }
}

/// A sub-hypergraph together with the map from its vertex indices back to the
/// parent's.
#[derive(Clone, Debug)]
pub struct Induced<T> {
    pub hypergraph: Hypergraph<T>,
    pub index_map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Conflict {
    /// Sorted vertex set of size `order + 1`.
    pub vertices: Vec<usize>,
    pub witness_edge: usize,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingSolution<T> {
    /// Sorted chosen vertices.
    pub chosen: Vec<usize>,
    pub weight: T,
    pub edge_loads: Vec<u32>,
    pub bicriteria_bound: u32,
    pub feasible: bool,
}

impl<T: Scalar> Hypergraph<T> {
    pub fn new(weights: Vec<T>, edges: Vec<Hyperedge>) -> Result<Self> {
        let n = weights.len();
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < T::zero() {
                return Err(Error::InvalidHypergraph(format!("vertex {i} has weight {w}")));
            }
        }
        let mut edges = edges;
        for (e, edge) in edges.iter_mut().enumerate() {
            edge.vertices.sort_unstable();
            if edge.capacity == 0 {
                return Err(Error::InvalidHypergraph(format!("edge {e} has capacity 0")));
            }
            if edge.vertices.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {e} repeats a vertex")));
            }
            if let Some(&v) = edge.vertices.last() {
                if v >= n {
                    return Err(Error::InvalidHypergraph(format!("edge {e} names vertex {v} of {n}")));
                }
            }
        }
        let mut incidence = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            for &v in &edge.vertices {
                incidence[v].push(e);
            }
        }
        Ok(Hypergraph { weights, edges, incidence, vertex_labels: None, edge_labels: None })
    }

    pub fn with_labels(mut self, vertex_labels: Option<Vec<String>>, edge_labels: Option<Vec<String>>) -> Result<Self> {
        if vertex_labels.as_ref().is_some_and(|l| l.len() != self.weights.len())
            || edge_labels.as_ref().is_some_and(|l| l.len() != self.edges.len())
        {
            return Err(Error::InvalidHypergraph("label count mismatch".into()));
        }
        self.vertex_labels = vertex_labels;
        self.edge_labels = edge_labels;
        Ok(self)
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> T {
        self.weights[v]
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Hyperedge {
        &self.edges[e]
    }

    /// Edges containing `v`, ascending.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn vertex_labels(&self) -> Option<&[String]> {
        self.vertex_labels.as_deref()
    }

    pub fn edge_labels(&self) -> Option<&[String]> {
        self.edge_labels.as_deref()
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn minimum_capacity(&self) -> MinCapacity {
        self.edges
            .iter()
            .map(|e| e.capacity)
            .min()
            .map_or(MinCapacity::Unconstrained, MinCapacity::Bounded)
    }

    /// Same vertices, only the edges that can actually be violated.
    pub fn binding_part(&self) -> Self {
        let edges = self.edges.iter().filter(|e| e.is_binding()).cloned().collect();
        Hypergraph::new(self.weights.clone(), edges).expect("subset of a valid hypergraph")
    }

    /// Capacities of 1 on every edge, all else unchanged.
    pub fn with_unit_capacities(&self) -> Self {
        let edges = self.edges.iter().map(|e| Hyperedge { vertices: e.vertices.clone(), capacity: 1 }).collect();
        Hypergraph::new(self.weights.clone(), edges).expect("valid")
    }

    pub fn induced(&self, subset: &[usize]) -> Result<Induced<T>> {
        let n = self.num_vertices();
        let mut index_map: Vec<usize> = subset.to_vec();
        index_map.sort_unstable();
        index_map.dedup();
        if index_map.last().is_some_and(|&v| v >= n) {
            return Err(Error::InvalidHypergraph("induced subset out of range".into()));
        }
        let mut new_index = vec![usize::MAX; n];
        for (i, &v) in index_map.iter().enumerate() {
            new_index[v] = i;
        }
        let weights = index_map.iter().map(|&v| self.weights[v]).collect();
        let mut edges = Vec::new();
        let mut labels = self.edge_labels.as_ref().map(|_| Vec::new());
        for (e, edge) in self.edges.iter().enumerate() {
            let vertices: Vec<usize> =
                edge.vertices.iter().filter(|&&v| new_index[v] != usize::MAX).map(|&v| new_index[v]).collect();
            if vertices.is_empty() {
                continue;
            }
            edges.push(Hyperedge { vertices, capacity: edge.capacity });
            if let (Some(out), Some(src)) = (labels.as_mut(), self.edge_labels.as_ref()) {
                out.push(src[e].clone());
            }
        }
        let vlabels = self.vertex_labels.as_ref().map(|l| index_map.iter().map(|&v| l[v].clone()).collect());
        let hypergraph = Hypergraph::new(weights, edges)?.with_labels(vlabels, labels)?;
        Ok(Induced { hypergraph, index_map })
    }

    /// Loads, weight and feasibility of `set` with loads allowed up to
    /// `max(cap, beta)`.
    pub fn check_packing(&self, set: &[usize], beta: u32) -> Result<PackingSolution<T>> {
        if beta == 0 {
            return Err(Error::InvalidConfig("beta must be at least 1".into()));
        }
        let mut chosen = set.to_vec();
        chosen.sort_unstable();
        chosen.dedup();
        if chosen.last().is_some_and(|&v| v >= self.num_vertices()) {
            return Err(Error::InvalidHypergraph("packing names a vertex out of range".into()));
        }
        let mut edge_loads = vec![0u32; self.edges.len()];
        for &v in &chosen {
            for &e in &self.incidence[v] {
                edge_loads[e] += 1;
            }
        }
        let feasible = edge_loads.iter().zip(&self.edges).all(|(&l, e)| l <= e.capacity.max(beta));
        let weight = chosen.iter().map(|&v| self.weights[v]).sum();
        Ok(PackingSolution { chosen, weight, edge_loads, bicriteria_bound: beta, feasible })
    }

    /// Streams the conflicts inside `members`, stopping after `budget`.
    pub fn conflicts<'a>(&'a self, members: &[usize], budget: usize) -> ConflictIter<'a, T> {
        let mut mask = vec![false; self.num_vertices()];
        for &v in members {
            mask[v] = true;
        }
        ConflictIter { graph: self, mask, edge: 0, pool: Vec::new(), combo: None, emitted: 0, budget, truncated: false }
    }

    /// Every conflict inside `members`, or the partial list with `truncated` set.
    pub fn enumerate_conflicts(&self, members: &[usize], budget: usize) -> ConflictList {
        let mut iter = self.conflicts(members, budget);
        let conflicts: Vec<Conflict> = iter.by_ref().collect();
        ConflictList { conflicts, truncated: iter.truncated() }
    }

    pub fn relax_capacities(&self, phi: u32) -> Result<Self> {
        if phi == 0 {
            return Err(Error::InvalidConfig("phi must be at least 1".into()));
        }
        let mut out = self.clone();
        for e in &mut out.edges {
            e.capacity = e.capacity.max(phi);
        }
        Ok(out)
    }

    /// Same structure with weights converted to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Hypergraph<U> {
        Hypergraph {
            weights: self.weights.iter().map(|w| U::from_float(w.as_f64())).collect(),
            edges: self.edges.clone(),
            incidence: self.incidence.clone(),
            vertex_labels: self.vertex_labels.clone(),
            edge_labels: self.edge_labels.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConflictList {
    pub conflicts: Vec<Conflict>,
    pub truncated: bool,
}

pub struct ConflictIter<'a, T> {
    graph: &'a Hypergraph<T>,
    mask: Vec<bool>,
    edge: usize,
    pool: Vec<usize>,
    combo: Option<Vec<usize>>,
    emitted: usize,
    budget: usize,
    truncated: bool,
}

impl<T> ConflictIter<'_, T> {
    /// True once the budget stopped the stream early.
    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Advances `combo` (indices into a pool of size `n`) to the next
/// lexicographic combination.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
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

impl<T> Iterator for ConflictIter<'_, T> {
    type Item = Conflict;

    fn next(&mut self) -> Option<Conflict> {
        loop {
            if self.truncated {
                return None;
            }
            if let Some(combo) = self.combo.as_mut() {
                if self.emitted == self.budget {
                    self.truncated = true;
                    return None;
                }
                let edge = &self.graph.edges[self.edge];
                let out = Conflict {
                    vertices: combo.iter().map(|&i| self.pool[i]).collect(),
                    witness_edge: self.edge,
                    order: edge.capacity,
                };
                self.emitted += 1;
                if !next_combination(combo, self.pool.len()) {
                    self.combo = None;
                    self.edge += 1;
                }
                return Some(out);
            }
            let edge = self.graph.edges.get(self.edge)?;
            self.pool.clear();
            self.pool.extend(edge.vertices.iter().copied().filter(|&v| self.mask[v]));
            let size = edge.capacity as usize + 1;
            if self.pool.len() >= size {
                self.combo = Some((0..size).collect());
            } else {
                self.edge += 1;
            }
        }
    }
}

/// Distinct vertex sets among `conflicts`, sorted.
pub fn distinct_conflict_sets(conflicts: &[Conflict]) -> Vec<Vec<usize>> {
    let set: BTreeSet<&Vec<usize>> = conflicts.iter().map(|c| &c.vertices).collect();
    set.into_iter().cloned().collect()
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrictDoc {
    vertices: Vec<StrictVertex>,
    edges: Vec<StrictEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrictVertex {
    w: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrictEdge {
    v: Vec<usize>,
    cap: u32,
}

const DOC_KEYS: [&str; 2] = ["vertices", "edges"];

fn warn_unknown(value: &serde_json::Value, known: &[&str], path: &str) {
    if let Some(map) = value.as_object() {
        for key in map.keys().filter(|k| !known.contains(&k.as_str())) {
            log::warn!("ignoring unknown field {path}{key}");
        }
    }
}

impl<T: Scalar> Hypergraph<T> {
    /// Parses the instance format. In strict mode unknown fields are errors,
    /// otherwise they are logged and ignored.
    pub fn from_json(text: &str, strict: bool) -> Result<Self> {
        let doc: StrictDoc = if strict {
            serde_json::from_str(text)?
        } else {
            let mut value: serde_json::Value = serde_json::from_str(text)?;
            warn_unknown(&value, &DOC_KEYS, "");
            let vertices = value.get("vertices").and_then(|v| v.as_array()).cloned().unwrap_or_default();
            let edges = value.get("edges").and_then(|v| v.as_array()).cloned().unwrap_or_default();
            for (i, v) in vertices.iter().enumerate() {
                warn_unknown(v, &["w"], &format!("vertices[{i}]."));
            }
            for (i, e) in edges.iter().enumerate() {
                warn_unknown(e, &["v", "cap"], &format!("edges[{i}]."));
            }
            if let Some(map) = value.as_object_mut() {
                map.retain(|k, _| DOC_KEYS.contains(&k.as_str()));
                for key in DOC_KEYS {
                    if let Some(serde_json::Value::Array(items)) = map.get_mut(key) {
                        let fields: &[&str] = if key == "vertices" { &["w"] } else { &["v", "cap"] };
                        for item in items.iter_mut() {
                            if let Some(obj) = item.as_object_mut() {
                                obj.retain(|k, _| fields.contains(&k.as_str()));
                            }
                        }
                    }
                }
            }
            serde_json::from_value(value)?
        };
        let weights = doc.vertices.iter().map(|v| T::from_float(v.w)).collect();
        let edges = doc.edges.into_iter().map(|e| Hyperedge::new(e.v, e.cap)).collect();
        Hypergraph::new(weights, edges)
    }

    pub fn to_json(&self) -> String {
        let doc = StrictDoc {
            vertices: self.weights.iter().map(|w| StrictVertex { w: w.as_f64() }).collect(),
            edges: self.edges.iter().map(|e| StrictEdge { v: e.vertices.clone(), cap: e.capacity }).collect(),
        };
        serde_json::to_string(&doc).expect("serializable")
    }
}
