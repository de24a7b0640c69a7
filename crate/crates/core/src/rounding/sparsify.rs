//! Replacing an LP solution by one whose values are multiples of `1/M`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::lp::FractionalSolution;
use crate::rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparsifyConfig {
    /// Constant in `T = ceil(c_t * d * ln(max(E, 2)))`.
    pub c_t: f64,
    /// VC-dimension estimate `d` of the range space.
    pub vc_dim: f64,
    pub retries: usize,
    /// `y_v = t_v / (divisor * T)`, so `M = divisor * T`.
    pub divisor: u32,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig { c_t: 1.0, vc_dim: 3.0, retries: 64, divisor: 3 }
    }
}

impl SparsifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_t > 0.0 && self.vc_dim > 0.0) || self.retries == 0 || self.divisor == 0 {
            return Err(Error::InvalidConfig("sparsify parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SparsifyOutcome<T> {
    /// `y_v = multiplicity[v] / m`.
    pub y: FractionalSolution<T>,
    pub multiplicity: Vec<u32>,
    pub m: u32,
    pub t: u32,
    pub success: bool,
    pub attempts: usize,
}

/// Draws `t_v = floor(x_v T) + Bernoulli(frac(x_v T))` and accepts the first
/// draw whose `y` is feasible, keeps at least a twelfth of the LP objective
/// and has energy within a factor 4 of `x`'s. Returns the best draw with
/// `success = false` when all retries fail.
pub fn sparsify<T: Scalar>(
    h: &Hypergraph<T>,
    x: &FractionalSolution<T>,
    config: &SparsifyConfig,
    seed: u64,
) -> Result<SparsifyOutcome<T>> {
    config.validate()?;
    let energy = x.energy.as_f64();
    let t = (config.c_t * config.vc_dim * energy.max(2.0).ln()).ceil().max(1.0) as u32;
    let m = config.divisor * t;
    let opt = x.objective;
    let mut best: Option<(bool, SparsifyOutcome<T>)> = None;
    for attempt in 0..config.retries {
        let mut rng = rng::rng(seed, rng::stream::SPARSIFY, attempt as u64);
        let multiplicity: Vec<u32> = x
            .values
            .iter()
            .map(|&xv| {
                let scaled = xv.as_f64().clamp(0.0, 1.0) * t as f64;
                let whole = scaled.floor();
                whole as u32 + (rng.gen::<f64>() < scaled - whole) as u32
            })
            .collect();
        // Integer feasibility check: sum of t_v over h at most cap(h) * M.
        let feasible = h.edges().iter().all(|e| {
            e.vertices.iter().map(|&v| multiplicity[v] as u64).sum::<u64>() <= e.capacity as u64 * m as u64
        }) && multiplicity.iter().all(|&c| c <= m);
        let values: Vec<T> = multiplicity.iter().map(|&c| T::from_float(c as f64 / m as f64)).collect();
        let y = FractionalSolution::from_values(h, values);
        let y_energy = y.energy.as_f64();
        let success = feasible
            && y.objective >= opt / T::from_float(12.0)
            && y_energy >= energy / 4.0 - 1e-12
            && y_energy <= 4.0 * energy + 1e-12;
        let outcome = SparsifyOutcome { y, multiplicity, m, t, success, attempts: attempt + 1 };
        if success {
            return Ok(outcome);
        }
        let better = match &best {
            None => true,
            Some((bf, b)) => (feasible, outcome.y.objective) > (*bf, b.y.objective),
        };
        if better {
            best = Some((feasible, outcome));
        }
    }
    let mut out = best.expect("retries >= 1").1;
    out.attempts = config.retries;
    Ok(out)
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
    fn zero_solution_succeeds() {
        let h = k3();
        let x = FractionalSolution::from_values(&h, vec![0.0; 3]);
        let out = sparsify(&h, &x, &SparsifyConfig::default(), 1).unwrap();
        assert!(out.success);
        assert_eq!(out.multiplicity, vec![0, 0, 0]);
    }

    #[test]
    fn integral_without_edges() {
        let h = Hypergraph::new(vec![1.0; 6], vec![]).unwrap();
        let x = FractionalSolution::from_values(&h, vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let ok = (0..200).filter(|&s| sparsify(&h, &x, &SparsifyConfig::default(), s).unwrap().success).count();
        assert!(ok as f64 > 0.95 * 200.0);
        let out = sparsify(&h, &x, &SparsifyConfig::default(), 0).unwrap();
        for (v, &c) in out.multiplicity.iter().enumerate() {
            assert_eq!(c, if x.values[v] == 1.0 { out.t } else { 0 });
            assert_eq!(out.y.values[v], c as f64 / out.m as f64);
        }
    }

    #[test]
    fn k3_half_point() {
        let h = k3();
        let x = FractionalSolution::from_values(&h, vec![0.5; 3]);
        let ok = (0..200).filter(|&s| sparsify(&h, &x, &SparsifyConfig::default(), s).unwrap().success).count();
        assert!(ok as f64 >= 0.95 * 200.0, "{ok}");
    }
}
