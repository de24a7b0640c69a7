//! Seeded sweeps over generated instances, reported as CSV rows.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use geopack::generate::{generate_instance, GeneratorSpec};
use geopack::rng::{derive, stream};

use crate::run::{command_name, run_with, Input, Report};
use crate::{CliConfig, Command, Format, InfeasibleOutput, Opts};

const ALGOS: [Command; 8] = [
    Command::Lp,
    Command::Pack,
    Command::PackRects,
    Command::PackBoxes,
    Command::PackPointsRects,
    Command::PackPointsFattri,
    Command::LocalSearch,
    Command::Exact,
];

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub instance_id: usize,
    pub algo: String,
    pub seed: u64,
    pub weight: Option<f64>,
    pub lp_obj: Option<f64>,
    pub oracle_opt: Option<f64>,
    /// Weight over the oracle optimum, or over the LP objective without one.
    pub ratio: Option<f64>,
    pub feasible: bool,
    pub beta: u32,
    pub wall_ms: f64,
}

impl Report {
    pub fn row(&self, instance_id: usize) -> Row {
        let weight = self.solution.as_ref().map(|s| s.weight);
        let oracle_opt = self.oracle.as_ref().map(|o| o.weight);
        let ratio = match (weight, oracle_opt.or(self.lp_objective)) {
            (Some(w), Some(d)) if d > 0.0 => Some(w / d),
            _ => None,
        };
        Row {
            instance_id,
            algo: self.command.clone(),
            seed: self.seed,
            weight,
            lp_obj: self.lp_objective,
            oracle_opt,
            ratio,
            feasible: self.feasible,
            beta: self.beta,
            wall_ms: self.timing.wall_ms,
        }
    }
}

pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn parse_algos(list: &str) -> Result<Vec<Command>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match ALGOS.iter().find(|&&c| command_name(c) == s) {
            Some(&c) => Ok(c),
            None => bail!("unknown algorithm {s:?}"),
        })
        .collect()
}

/// Instance `i` is generated with seed `derive(seed, BENCH, i)`; rounding run
/// `s` uses `derive(seed, BENCH, 2^32 + s)`.
pub fn bench(spec: &GeneratorSpec, cfg: &CliConfig, opts: &Opts) -> Result<String> {
    let algos = parse_algos(&opts.algos)?;
    if algos.is_empty() {
        bail!("no algorithms given");
    }
    let params = opts.params();
    let inputs: Vec<Input> = (0..opts.instances)
        .map(|i| {
            let spec = GeneratorSpec { seed: derive(spec.seed, stream::BENCH, i as u64), ..spec.clone() };
            Ok(Input::Geometric(generate_instance(&spec)?))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..inputs.len()).flat_map(|i| (0..opts.seeds).map(move |s| (i, s))).collect();
    let mut rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let mut cfg = cfg.clone();
            cfg.solver.seed = derive(spec.seed, stream::BENCH, (1 << 32) + s as u64);
            algos.iter().map(|&a| Ok(run_with(a, &inputs[i], &cfg, &params)?.row(i))).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| (a.instance_id, &a.algo, a.seed).cmp(&(b.instance_id, &b.algo, b.seed)));
    if let Some(bad) = rows.iter().find(|r| !r.feasible) {
        return Err(InfeasibleOutput(format!("{} on instance {}", bad.algo, bad.instance_id)).into());
    }
    match opts.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(&rows),
        Format::Json => Ok(serde_json::to_string_pretty(&rows)? + "\n"),
    }
}
