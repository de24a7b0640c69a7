//! Selection and alteration rounding of the packing LP.
//!
//! A vertex ordering is built by repeatedly moving the vertex of least
//! resistance (or least estimated violation probability) to the last free
//! position. Rounding then selects each vertex with probability `x_v / rho`
//! and scans the selected vertices in that order, keeping each one that still
//! fits.

mod peel;
mod resistance;
mod sparsify;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, MinCapacity, PackingSolution, DEFAULT_CONFLICT_BUDGET};
use crate::lp::{build_and_solve_lp, FractionalSolution, DEFAULT_TOL};
use crate::rng;
use crate::scalar::Scalar;

pub use peel::uniform_capacity_peel;
pub use resistance::{conflict_potential, estimate_violation_probability, resistance};
pub use sparsify::{sparsify, SparsifyConfig, SparsifyOutcome};

use resistance::{estimate_with_mask, ConflictIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    ExactResistance,
    SampledViolation,
}

/// Calibration stops doubling alpha after this many rounds.
pub const CALIBRATION_DOUBLINGS: u32 = 10;
/// Resistance (or violation probability) target of calibration.
pub const CALIBRATION_TARGET: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub alpha: f64,
    pub gamma_value: f64,
    pub scale_override: Option<f64>,
    pub ordering_mode: OrderingMode,
    /// Samples per violation estimate; `None` means `ceil(200 ln(2 n^2))`.
    pub sample_count: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub calibrate: bool,
    pub conflict_budget: usize,
    pub lp_tol: f64,
    pub sparsify: SparsifyConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 4.0,
            gamma_value: 1.0,
            scale_override: None,
            ordering_mode: OrderingMode::ExactResistance,
            sample_count: None,
            seed: 0,
            trials: 16,
            calibrate: true,
            conflict_budget: DEFAULT_CONFLICT_BUDGET,
            lp_tol: DEFAULT_TOL,
            sparsify: SparsifyConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.gamma_value >= 1.0 && self.gamma_value.is_finite()) {
            return bad("gamma_value must be at least 1");
        }
        if self.scale_override.is_some_and(|r| !(r >= 1.0)) {
            return bad("scale_override must be at least 1");
        }
        if self.sample_count == Some(0) || self.trials == 0 {
            return bad("sample_count and trials must be positive");
        }
        self.sparsify.validate()
    }

    pub fn samples_for(&self, n: usize) -> usize {
        self.sample_count.unwrap_or_else(|| default_sample_count(n))
    }
}

pub fn default_sample_count(n: usize) -> usize {
    let n = n.max(1) as f64;
    (200.0 * (2.0 * n * n).ln()).ceil().max(1.0) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ordering<T> {
    /// `order[i]` is the vertex at position `i`.
    pub order: Vec<usize>,
    /// Resistance or estimated violation probability of `order[i]` with
    /// respect to `order[..=i]`.
    pub diagnostics: Vec<T>,
}

impl<T: Scalar> Ordering<T> {
    /// Largest diagnostic, i.e. the worst least-resistance value over all
    /// prefixes.
    pub fn worst(&self) -> T {
        self.diagnostics.iter().copied().fold(T::zero(), T::max)
    }

    fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

/// Index of the smallest value, ties (up to rounding noise) to the lowest
/// index. Entries of `alive` that are false are skipped.
fn argmin_alive<T: Scalar>(values: &[T], alive: &[bool]) -> Option<usize> {
    let min = values.iter().zip(alive).filter(|(_, &a)| a).map(|(&v, _)| v).fold(T::infinity(), T::min);
    let slack = T::from_float(1e-12) * (T::one() + min.abs());
    (0..values.len()).find(|&v| alive[v] && values[v] <= min + slack)
}

pub fn build_ordering<T: Scalar>(h: &Hypergraph<T>, x: &[T], rho: T, config: &SolverConfig) -> Result<Ordering<T>> {
    if rho < T::one() {
        return Err(Error::InvalidScale(rho.as_f64()));
    }
    let n = h.num_vertices();
    let mut order = vec![0; n];
    let mut diagnostics = vec![T::zero(); n];
    let mut alive = vec![true; n];
    match config.ordering_mode {
        OrderingMode::ExactResistance => {
            let mut index = ConflictIndex::build(h, x, rho, config.conflict_budget)?;
            for pos in (0..n).rev() {
                let v = argmin_alive(&index.resistance, &alive).expect("a vertex remains");
                order[pos] = v;
                diagnostics[pos] = index.resistance[v];
                alive[v] = false;
                index.remove(v, x, rho);
            }
        }
        OrderingMode::SampledViolation => {
            let samples = config.samples_for(n);
            for pos in (0..n).rev() {
                let round_seed = rng::derive(config.seed, rng::stream::VIOLATION_SAMPLES, pos as u64);
                let estimates: Vec<T> = (0..n)
                    .into_par_iter()
                    .map(|v| {
                        if !alive[v] || x[v] <= T::zero() {
                            T::zero()
                        } else {
                            T::from_float(estimate_with_mask(h, v, &alive, x, rho, samples, round_seed))
                        }
                    })
                    .collect();
                let v = argmin_alive(&estimates, &alive).expect("a vertex remains");
                order[pos] = v;
                diagnostics[pos] = estimates[v];
                alive[v] = false;
            }
        }
    }
    Ok(Ordering { order, diagnostics })
}

/// Outcome of one rounding run, keeping the selected set for diagnostics.
#[derive(Clone, Debug)]
pub struct RoundingOutcome<T> {
    pub selected: Vec<usize>,
    pub solution: PackingSolution<T>,
}

pub fn round_with_alteration<T: Scalar>(
    h: &Hypergraph<T>,
    x: &[T],
    ordering: &Ordering<T>,
    rho: T,
    seed: u64,
) -> Result<PackingSolution<T>> {
    Ok(round_detailed(h, x, ordering, rho, seed)?.solution)
}

pub fn round_detailed<T: Scalar>(
    h: &Hypergraph<T>,
    x: &[T],
    ordering: &Ordering<T>,
    rho: T,
    seed: u64,
) -> Result<RoundingOutcome<T>> {
    if rho < T::one() {
        return Err(Error::InvalidScale(rho.as_f64()));
    }
    let mut rng = rng::rng(seed, rng::stream::SELECTION, 0);
    let selected: Vec<usize> =
        (0..h.num_vertices()).filter(|&v| rng.gen::<f64>() < (x[v] / rho).as_f64()).collect();
    let pos = ordering.positions();
    let mut scan = selected.clone();
    scan.sort_by_key(|&v| pos[v]);
    let mut load = vec![0u32; h.num_edges()];
    let mut accepted = Vec::new();
    for v in scan {
        if h.incident(v).iter().all(|&e| load[e] < h.edge(e).capacity) {
            h.incident(v).iter().for_each(|&e| load[e] += 1);
            accepted.push(v);
        }
    }
    let solution = h.check_packing(&accepted, 1)?;
    debug_assert!(solution.feasible);
    Ok(RoundingOutcome { selected, solution })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleChoice<T> {
    pub rho: T,
    pub alpha: f64,
    /// Calibration hit its doubling cap without meeting the target.
    pub capped: bool,
}

/// `rho = alpha * gamma^(1/nu)` over the binding edges, at least 1, with
/// optional calibration that doubles alpha until the measured
/// least-resistance values (exact mode: every prefix of the ordering; sampled
/// mode: the least estimated violation over all vertices) meet 1/4.
pub fn choose_scale<T: Scalar>(h: &Hypergraph<T>, x: &[T], config: &SolverConfig) -> Result<ScaleChoice<T>> {
    config.validate()?;
    if let Some(r) = config.scale_override {
        return Ok(ScaleChoice { rho: T::from_float(r), alpha: config.alpha, capped: false });
    }
    let binding = h.binding_part();
    let nu = match binding.minimum_capacity() {
        MinCapacity::Unconstrained => return Ok(ScaleChoice { rho: T::one(), alpha: config.alpha, capped: false }),
        MinCapacity::Bounded(k) => k,
    };
    let rho_for = |alpha: f64| T::from_float((alpha * config.gamma_value.powf(1.0 / nu as f64)).max(1.0));
    let mut alpha = config.alpha;
    if !config.calibrate {
        return Ok(ScaleChoice { rho: rho_for(alpha), alpha, capped: false });
    }
    let target = T::from_float(CALIBRATION_TARGET);
    for _ in 0..CALIBRATION_DOUBLINGS {
        if calibration_value(&binding, x, rho_for(alpha), config)? <= target {
            return Ok(ScaleChoice { rho: rho_for(alpha), alpha, capped: false });
        }
        alpha *= 2.0;
    }
    let capped = calibration_value(&binding, x, rho_for(alpha), config)? > target;
    if capped {
        log::warn!("scale calibration capped at alpha = {alpha}");
    }
    Ok(ScaleChoice { rho: rho_for(alpha), alpha, capped })
}

fn calibration_value<T: Scalar>(h: &Hypergraph<T>, x: &[T], rho: T, config: &SolverConfig) -> Result<T> {
    match config.ordering_mode {
        OrderingMode::ExactResistance => Ok(build_ordering(h, x, rho, config)?.worst()),
        OrderingMode::SampledViolation => {
            let n = h.num_vertices();
            let all = vec![true; n];
            let samples = config.samples_for(n);
            let seed = rng::derive(config.seed, rng::stream::CALIBRATION, 0);
            let best = (0..n)
                .into_par_iter()
                .filter(|&v| x[v] > T::zero())
                .map(|v| estimate_with_mask(h, v, &all, x, rho, samples, seed))
                .reduce(|| 1.0f64, f64::min);
            Ok(T::from_float(if n == 0 { 0.0 } else { best }))
        }
    }
}

#[derive(Clone, Debug)]
pub struct PackReport<T> {
    pub solution: PackingSolution<T>,
    pub lp: FractionalSolution<T>,
    pub rho: T,
    pub nu: MinCapacity,
    pub calibration_capped: bool,
    pub trial_weights: Vec<T>,
}

/// LP, scale, ordering and the best of `config.trials` rounding runs.
///
/// Only binding edges (more members than capacity) take part in rounding.
/// Vertices outside every binding edge can never cause a violation and are
/// always kept.
pub fn pack_hypergraph<T: Scalar>(h: &Hypergraph<T>, config: &SolverConfig) -> Result<PackReport<T>> {
    config.validate()?;
    let lp = build_and_solve_lp(h, config.lp_tol)?;
    pack_with_lp(h, lp, config)
}

pub fn pack_with_lp<T: Scalar>(h: &Hypergraph<T>, lp: FractionalSolution<T>, config: &SolverConfig) -> Result<PackReport<T>> {
    let binding = h.binding_part();
    let free: Vec<usize> = (0..h.num_vertices()).filter(|&v| binding.incident(v).is_empty()).collect();
    let nu = binding.minimum_capacity();
    if nu == MinCapacity::Unconstrained {
        let solution = h.check_packing(&free, 1)?;
        let trial_weights = vec![solution.weight];
        return Ok(PackReport { solution, lp, rho: T::one(), nu, calibration_capped: false, trial_weights });
    }
    let x = &lp.values;
    let scale = choose_scale(&binding, x, config)?;
    let ordering = build_ordering(&binding, x, scale.rho, config)?;
    let trials: Vec<PackingSolution<T>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = rng::derive(config.seed, rng::stream::TRIAL, t as u64);
            let run = round_with_alteration(&binding, x, &ordering, scale.rho, seed)?;
            let mut chosen = run.chosen;
            chosen.extend(free.iter().copied());
            h.check_packing(&chosen, 1)
        })
        .collect::<Result<_>>()?;
    let trial_weights: Vec<T> = trials.iter().map(|s| s.weight).collect();
    let best = trials
        .into_iter()
        .enumerate()
        .fold(None::<(usize, PackingSolution<T>)>, |acc, (i, s)| match acc {
            Some((j, b)) if b.weight >= s.weight => Some((j, b)),
            _ => Some((i, s)),
        })
        .map(|(_, s)| s)
        .expect("trials >= 1");
    if !best.feasible {
        return Err(Error::Infeasible("rounded packing violates a capacity".into()));
    }
    Ok(PackReport { solution: best, lp, rho: scale.rho, nu, calibration_capped: scale.capped, trial_weights })
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
    fn k3_ordering_tie_break() {
        let ord = build_ordering(&k3(), &[0.5; 3], 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(ord.order, vec![2, 1, 0]);
        assert_eq!(ord.diagnostics, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn zero_resistance_goes_last() {
        let h = Hypergraph::new(vec![1.0; 3], vec![Hyperedge::new(vec![0, 1], 1)]).unwrap();
        let ord = build_ordering(&h, &[0.5, 0.5, 0.5], 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(*ord.order.last().unwrap(), 2);
        let one = Hypergraph::new(vec![1.0], vec![]).unwrap();
        assert_eq!(build_ordering(&one, &[1.0], 1.0, &SolverConfig::default()).unwrap().order, vec![0]);
    }

    #[test]
    fn sampled_ordering_is_a_permutation() {
        let config = SolverConfig { ordering_mode: OrderingMode::SampledViolation, sample_count: Some(500), ..Default::default() };
        let ord = build_ordering(&k3(), &[0.5, 0.3, 0.2], 1.0, &config).unwrap();
        let mut sorted = ord.order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn rounding_examples() {
        let one = Hypergraph::new(vec![3.0], vec![]).unwrap();
        let ord = Ordering { order: vec![0], diagnostics: vec![0.0] };
        for seed in 0..20 {
            assert_eq!(round_with_alteration(&one, &[1.0], &ord, 1.0, seed).unwrap().weight, 3.0);
        }
        let h = k3();
        let ord = Ordering { order: vec![1, 2, 0], diagnostics: vec![0.0; 3] };
        assert!(round_with_alteration(&h, &[0.0; 3], &ord, 1.0, 3).unwrap().chosen.is_empty());
        for seed in 0..20 {
            assert_eq!(round_with_alteration(&h, &[1.0; 3], &ord, 1.0, seed).unwrap().chosen, vec![1]);
        }
        assert!(round_with_alteration(&h, &[1.0; 3], &ord, 0.5, 0).is_err());
    }

    #[test]
    fn scale_examples() {
        let h = k3();
        let x = [0.5; 3];
        let plain = SolverConfig { calibrate: false, ..Default::default() };
        assert_eq!(choose_scale(&h, &x, &plain).unwrap().rho, 4.0);
        let h2 = Hypergraph::new(vec![1.0; 3], vec![Hyperedge::new(vec![0, 1, 2], 2)]).unwrap();
        let cfg = SolverConfig { gamma_value: 16.0, ..plain.clone() };
        assert_eq!(choose_scale(&h2, &x, &cfg).unwrap().rho, 16.0);
        let cfg = SolverConfig { scale_override: Some(2.5), ..plain };
        assert_eq!(choose_scale(&h, &x, &cfg).unwrap().rho, 2.5);
    }

    #[test]
    fn calibration_meets_target() {
        let h = k3();
        let x = [1.0, 1.0, 1.0];
        let choice = choose_scale(&h, &x, &SolverConfig::default()).unwrap();
        let ord = build_ordering(&h, &x, choice.rho, &SolverConfig::default()).unwrap();
        assert!(ord.worst() <= 0.25);
        assert!(choice.rho >= 8.0);
    }

    #[test]
    fn pack_examples() {
        let free = Hypergraph::new(vec![1.0, 2.0, 3.0], vec![]).unwrap();
        let r = pack_hypergraph(&free, &SolverConfig::default()).unwrap();
        assert_eq!(r.solution.weight, 6.0);
        let r = pack_hypergraph(&k3(), &SolverConfig::default()).unwrap();
        assert_eq!(r.solution.weight, 1.0);
        assert!(r.solution.feasible);
        let flower = Hypergraph::new(vec![1.0, 1.0], vec![Hyperedge::new(vec![0, 1], 2)]).unwrap();
        assert_eq!(pack_hypergraph(&flower, &SolverConfig::default()).unwrap().solution.weight, 2.0);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = SolverConfig { seed: 9, ordering_mode: OrderingMode::SampledViolation, ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SolverConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"alpha": 2.0}"#).is_ok());
        assert!(serde_json::from_str::<SolverConfig>(r#"{"beta": 2.0}"#).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = Hypergraph<f64>> {
        (1usize..10).prop_flat_map(|n| {
            let edge = (proptest::collection::btree_set(0..n, 1..=n), 1u32..3)
                .prop_map(|(s, c)| Hyperedge::new(s.into_iter().collect(), c));
            (proptest::collection::vec(0.0f64..5.0, n), proptest::collection::vec(edge, 0..8))
                .prop_map(|(w, e)| Hypergraph::new(w, e).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rounding_is_feasible_and_downward_closed(h in arb_instance(), seed in any::<u64>(), rho in 1.0f64..4.0) {
            let lp = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
            let ord = build_ordering(&h, &lp.values, rho, &SolverConfig::default()).unwrap();
            let out = round_detailed(&h, &lp.values, &ord, rho, seed).unwrap();
            prop_assert!(out.solution.feasible);
            prop_assert!(out.solution.chosen.iter().all(|v| out.selected.contains(v)));
            for drop in &out.solution.chosen {
                let rest: Vec<usize> = out.solution.chosen.iter().copied().filter(|v| v != drop).collect();
                prop_assert!(h.check_packing(&rest, 1).unwrap().feasible);
            }
        }

        #[test]
        fn ordering_is_a_permutation(h in arb_instance()) {
            let lp = build_and_solve_lp(&h, DEFAULT_TOL).unwrap();
            let ord = build_ordering(&h, &lp.values, 2.0, &SolverConfig::default()).unwrap();
            let mut sorted = ord.order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..h.num_vertices()).collect::<Vec<_>>());
        }
    }
}
