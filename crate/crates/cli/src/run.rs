//! Single-instance dispatch and reporting.

use std::fs;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use geopack::fattri::{pack_points_into_fat_triangles, FAT_BETA};
use geopack::generate::generate_instance;
use geopack::localsearch::local_search_disks;
use geopack::lp::build_and_solve_lp;
use geopack::oracle::exact_pack;
use geopack::rect::{pack_boxes_into_points, pack_points_into_rects, pack_rects_into_points};
use geopack::rounding::pack_hypergraph;
use geopack::{GeometricInstance, Hypergraph};

use crate::{CliConfig, Command, Opts};

pub enum Input {
    Geometric(GeometricInstance),
    Plain(Hypergraph),
}

impl Input {
    pub fn load(opts: &Opts) -> Result<Self> {
        if let Some(spec) = opts.spec()? {
            return Ok(Input::Geometric(generate_instance(&spec)?));
        }
        let Some(path) = &opts.instance else { bail!("need --instance or --gen") };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, opts.strict)
    }

    /// Plain hypergraphs are recognised by their `vertices` key.
    pub fn parse(text: &str, strict: bool) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        if value.get("vertices").is_some() {
            Ok(Input::Plain(Hypergraph::from_json(text, strict)?))
        } else {
            Ok(Input::Geometric(GeometricInstance::from_json(text, strict)?))
        }
    }

    pub fn canonical_json(&self) -> String {
        match self {
            Input::Geometric(inst) => inst.to_json(),
            Input::Plain(h) => h.to_json(),
        }
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Hypergraph plus, for geometric input, the instance index of each vertex.
    fn hypergraph(&self) -> Result<(Hypergraph, Vec<usize>)> {
        match self {
            Input::Geometric(inst) => {
                let built = inst.build_hypergraph::<f64>()?;
                Ok((built.hypergraph, built.vertex_source))
            }
            Input::Plain(h) => Ok((h.clone(), (0..h.num_vertices()).collect())),
        }
    }

    fn geometric(&self, command: Command) -> Result<&GeometricInstance> {
        match self {
            Input::Geometric(inst) => Ok(inst),
            Input::Plain(_) => bail!("{command:?} needs a geometric instance"),
        }
    }
}

/// Knobs that are not part of the solver config.
#[derive(Clone, Debug)]
pub struct Params {
    pub phi: Option<u32>,
    pub b: usize,
    pub node_budget: u64,
    pub with_oracle: bool,
}

impl Opts {
    pub fn params(&self) -> Params {
        Params { phi: self.phi, b: self.b, node_budget: self.node_budget, with_oracle: self.with_oracle }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    /// Instance indices: regions or points depending on the direction.
    pub chosen: Vec<usize>,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleValue {
    pub weight: f64,
    pub proven_optimal: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub instance_sha256: String,
    pub config: CliConfig,
    pub seed: u64,
    pub beta: u32,
    pub feasible: bool,
    pub solution: Option<Solution>,
    pub lp_objective: Option<f64>,
    pub oracle: Option<OracleValue>,
    pub details: Value,
    pub timing: Timing,
}

pub fn command_name(command: Command) -> String {
    let dbg = format!("{command:?}");
    let mut out = String::new();
    for (i, c) in dbg.chars().enumerate() {
        if c.is_uppercase() && i > 0 {
            out.push('-');
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

pub fn run(command: Command, input: &Input, cfg: &CliConfig, opts: &Opts) -> Result<Report> {
    run_with(command, input, cfg, &opts.params())
}

pub fn run_with(command: Command, input: &Input, cfg: &CliConfig, params: &Params) -> Result<Report> {
    let (h, source) = input.hypergraph()?;
    let phi = params.phi.unwrap_or(1);
    if phi != 1 && !matches!(command, Command::Lp | Command::Pack | Command::Exact) {
        bail!("--phi applies to lp, pack and exact only");
    }
    let relaxed = h.relax_capacities(phi)?;
    let solver = &cfg.solver;
    let start = Instant::now();
    // `chosen` holds hypergraph vertex ids.
    let (chosen, beta, lp_objective, details): (Option<Vec<usize>>, u32, Option<f64>, Value) = match command {
        Command::Lp => {
            let lp = build_and_solve_lp(&relaxed, solver.lp_tol)?;
            let ok = lp.feasibility_slack <= solver.lp_tol.max(1e-9) * 10.0;
            if !ok {
                return Err(crate::InfeasibleOutput(format!("LP slack {}", lp.feasibility_slack)).into());
            }
            (None, phi, Some(lp.objective), json!({ "values": lp.values, "energy": lp.energy }))
        }
        Command::Pack => {
            let r = pack_hypergraph(&relaxed, solver)?;
            let details = json!({ "rho": r.rho, "calibration_capped": r.calibration_capped, "trial_weights": r.trial_weights });
            (Some(r.solution.chosen), phi, Some(r.lp.objective), details)
        }
        Command::Exact => {
            let r = exact_pack(&relaxed, params.node_budget, true);
            (Some(r.solution.chosen), phi, None, json!({ "proven_optimal": r.proven_optimal, "nodes": r.nodes }))
        }
        Command::PackRects | Command::PackBoxes => {
            let inst = input.geometric(command)?;
            let r = if command == Command::PackRects { pack_rects_into_points(inst, solver)? } else { pack_boxes_into_points(inst, solver)? };
            let ids = to_vertices(&r.solution.chosen, &source)?;
            (Some(ids), 1, None, json!({ "level_weights": r.level_weights, "leaf_calls": r.leaf_calls }))
        }
        Command::PackPointsRects | Command::PackPointsFattri => {
            let inst = input.geometric(command)?;
            let (r, beta) = if command == Command::PackPointsRects {
                (pack_points_into_rects(inst, solver)?, 2)
            } else {
                (pack_points_into_fat_triangles(inst, solver, &cfg.fat)?, FAT_BETA)
            };
            let details = json!({ "pieces": r.pieces, "copies": r.copies, "m": r.m, "k": r.k, "sparsify_success": r.sparsify_success });
            (Some(to_vertices(&r.solution.chosen, &source)?), beta, Some(r.lp_objective), details)
        }
        Command::LocalSearch => {
            let inst = input.geometric(command)?;
            let r = local_search_disks(inst, params.b)?;
            let details = json!({ "b": params.b, "swaps": r.swaps.len(), "pruned": r.pruned });
            (Some(to_vertices(&r.solution.chosen, &source)?), 1, None, details)
        }
        Command::Bench | Command::Generate => unreachable!("handled by the caller"),
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (solution, feasible) = match chosen {
        Some(ids) => {
            // Re-validate independently of the algorithm's own check.
            let check = h.check_packing(&ids, beta)?;
            let chosen = ids.iter().map(|&v| source[v]).collect();
            (Some(Solution { chosen, weight: check.weight }), check.feasible)
        }
        None => (None, true),
    };
    let oracle = params.with_oracle.then(|| {
        let r = exact_pack(&h, params.node_budget, true);
        OracleValue { weight: r.solution.weight, proven_optimal: r.proven_optimal, nodes: r.nodes }
    });
    log::info!("{} finished in {wall_ms:.1} ms", command_name(command));
    Ok(Report {
        command: command_name(command),
        instance_sha256: input.digest(),
        config: cfg.clone(),
        seed: solver.seed,
        beta,
        feasible,
        solution,
        lp_objective,
        oracle,
        details,
        timing: Timing { wall_ms },
    })
}

/// Maps instance indices back to hypergraph vertex ids.
fn to_vertices(chosen: &[usize], source: &[usize]) -> Result<Vec<usize>> {
    chosen
        .iter()
        .map(|&i| source.iter().position(|&s| s == i).with_context(|| format!("index {i} has no vertex")))
        .collect()
}
