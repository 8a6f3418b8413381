//! Preset experiments over a seed × horizon lattice.

use std::io::Write;
use std::time::Instant;

use rand::Rng;

use super::config::{ExperimentConfig, Preset};
use super::schema::{write_rows, ResultRow};
use crate::environment::{EnvConfig, TraceMode};
use crate::error::Result;
use crate::estimators::{gmm_contract_iv, gmm_repeated_iv, ols_naive, Dataset, Estimate};
use crate::model::{AgentType, Contract, DiagonalPowerCost};
use crate::online::{collect_exploration_dataset, run_epoch_greedy, run_etc, EpochSchedule, ExplorationDistribution};
use crate::rng::{round_rng, Stream};
use crate::robust::{
    find_self_owned, improve_to_linear, payoff_range, triangulation_coverage, upper_facets, validity_epsilon,
    TabularContract,
};

/// Monte-Carlo draws used to measure the diversity level for epoch lengths.
pub const DIVERSITY_SAMPLES: usize = 20_000;

/// Grid step of the uniformity check.
pub const UNIFORMITY_STEP: f64 = 0.01;

/// Benefit vector of the uniformity check; the optimum `θ/2` sits on the grid.
pub const UNIFORMITY_THETA: [f64; 2] = [1.0, 2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutput {
    pub comments: Vec<(String, String)>,
    pub rows: Vec<ResultRow>,
}

impl PresetOutput {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(ResultRow::is_ok)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.comments, &self.rows)
    }
}

#[derive(Debug, Clone, Copy)]
enum Estimator {
    ContractIv,
    RepeatedIv,
    Ols,
}

impl Estimator {
    fn method(self) -> &'static str {
        match self {
            Estimator::ContractIv => "gmm-contract-iv",
            Estimator::RepeatedIv => "gmm-repeated-iv",
            Estimator::Ols => "ols",
        }
    }

    fn fit(self, data: &Dataset) -> Result<Estimate> {
        match self {
            Estimator::ContractIv => gmm_contract_iv(data),
            Estimator::RepeatedIv => gmm_repeated_iv(data),
            Estimator::Ols => ols_naive(data),
        }
    }
}

fn estimators(preset: Preset) -> &'static [Estimator] {
    match preset {
        Preset::FigGmmContractIv => &[Estimator::ContractIv],
        Preset::FigGmmRepeated => &[Estimator::RepeatedIv],
        Preset::OlsBias => &[Estimator::ContractIv, Estimator::RepeatedIv, Estimator::Ols],
        _ => &[],
    }
}

fn primary_method(preset: Preset) -> &'static str {
    match preset {
        Preset::FigGmmContractIv | Preset::OlsBias => "gmm-contract-iv",
        Preset::FigGmmRepeated => "gmm-repeated-iv",
        Preset::EtcRegret => "etc",
        Preset::EpochGreedyRegret => "epoch-greedy",
        Preset::RobustnessSuite => "worst-linear",
        Preset::UniformityGrid => "grid-argmax",
    }
}

struct Cell {
    seed: u64,
    horizon: Option<usize>,
}

fn estimation_cell(cfg: &ExperimentConfig, seed: u64, horizon: usize) -> Result<Vec<ResultRow>> {
    let env = EnvConfig::experiments(cfg.sigma, seed);
    let explore = ExplorationDistribution::default_for_box(env.contract_box())?;
    let data = collect_exploration_dataset(&env, horizon, &explore)?;
    let name = cfg.preset.name();
    Ok(estimators(cfg.preset)
        .iter()
        .map(|est| match est.fit(&data) {
            Ok(e) => {
                let mut row = ResultRow::new(name, seed, Some(horizon), est.method());
                row.error = Some(e.error(env.theta_star()));
                row.min_singular = Some(e.min_singular);
                row.value = e.with_bound(cfg.delta).ok().and_then(|e| e.bound);
                row
            }
            Err(err) => ResultRow::failure(name, seed, Some(horizon), est.method(), &err.to_string()),
        })
        .collect())
}

fn etc_row(preset: Preset, env: &EnvConfig, seed: u64, horizon: usize) -> Result<ResultRow> {
    let explore = ExplorationDistribution::default_for_box(env.contract_box())?;
    let run = run_etc(env, horizon, &explore, env.degree(), TraceMode::RegretOnly)?;
    let mut row = ResultRow::new(preset.name(), seed, Some(horizon), "etc");
    row.cum_proxy = Some(run.ledger.total_proxy());
    row.cum_utility_regret = Some(run.ledger.total_utility_regret());
    if let Some(est) = &run.decisions.estimate {
        row.error = Some(est.error(env.theta_star()));
        row.min_singular = Some(est.min_singular);
    }
    row.value = Some(run.decisions.exploration_rounds as f64);
    Ok(row)
}

fn epoch_rows(cfg: &ExperimentConfig, schedule: &EpochSchedule, seed: u64, horizon: usize) -> Result<Vec<ResultRow>> {
    let env = EnvConfig::diversity(cfg.sigma, seed);
    let name = cfg.preset.name();
    let run = run_epoch_greedy(&env, horizon, schedule, env.degree(), TraceMode::RegretOnly)?;
    let mut head = ResultRow::new(name, seed, Some(horizon), "epoch-greedy");
    head.cum_proxy = Some(run.ledger.total_proxy());
    head.cum_utility_regret = Some(run.ledger.total_utility_regret());
    head.value = Some(run.flagged_epochs() as f64);
    let mut rows = vec![head];
    let epochs = &run.ledger.per_epoch;
    for (prev, e) in epochs.iter().zip(epochs.iter().skip(1)) {
        let mut row = ResultRow::new(name, seed, Some(horizon), &format!("epoch-greedy:e{:02}", e.index));
        row.cum_proxy = Some(e.proxy);
        row.cum_utility_regret = Some(e.utility_regret);
        row.min_singular = e.min_singular;
        if let Some(sq) = e.estimate_sq_error {
            row.error = Some(sq.sqrt());
            // Squared error times the length of the epoch it was estimated from.
            row.value = Some(sq * prev.len as f64);
        }
        rows.push(row);
    }
    rows.push(etc_row(cfg.preset, &env, seed, horizon)?);
    Ok(rows)
}

/// Random `d = 2` instance: integer payments in `0..=5`, quadratic agent
/// with weights in `[1, 6)`, benefits in `[0.5, 3)`.
pub fn random_robust_instance(seed: u64) -> (TabularContract, AgentType, Vec<f64>) {
    let mut rng = round_rng(seed, 0, Stream::Probe);
    let payments = (0..4).map(|_| rng.random_range(0..=5) as f64).collect();
    let weights = (0..2).map(|_| rng.random_range(1.0..6.0)).collect();
    let theta = (0..2).map(|_| rng.random_range(0.5..3.0)).collect();
    (
        TabularContract::new(2, payments).expect("nonnegative payments"),
        AgentType::new(DiagonalPowerCost::new(weights, 2.0).expect("positive weights")),
        theta,
    )
}

fn robust_rows(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<ResultRow>> {
    let (w, agent, theta) = random_robust_instance(seed);
    let name = cfg.preset.name();
    let facets = upper_facets(&w);
    let owned = find_self_owned(&w, &agent)?;
    let linear = improve_to_linear(&owned.hyperplane, &agent)?;
    let linear_table = TabularContract::affine(linear.as_slice(), 0.0)?;
    let anchors = [owned.action.clone()];
    let original = payoff_range(&w, &agent, &theta, cfg.resolution, &anchors)?.worst;
    let improved = payoff_range(&linear_table, &agent, &theta, cfg.resolution, &anchors)?.worst;
    let stat = |method: &str, v: f64| {
        let mut row = ResultRow::new(name, seed, None, method);
        row.value = Some(v);
        row
    };
    Ok(vec![
        stat("coverage", triangulation_coverage(&facets, 10_000)),
        stat("dominance-gap", improved - original),
        stat("epsilon", validity_epsilon(&facets)),
        stat("facets", facets.len() as f64),
        stat("self-owned-distance", owned.distance),
        stat("worst-linear", improved),
        stat("worst-original", original),
    ])
}

/// Grid search of the principal's utility over the half-open box
/// `[0, 2·max θ)^d`. Returns the argmax grid indices.
pub fn uniformity_argmax(agent: &AgentType, theta: &[f64], step: f64) -> Result<Vec<usize>> {
    let d = theta.len();
    let upper = 2.0 * theta.iter().copied().fold(0.0, f64::max);
    let n = (upper / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, vec![0; d]);
    let mut idx = vec![0usize; d];
    loop {
        let beta = Contract::new(idx.iter().map(|&i| i as f64 * step).collect())?;
        let a = agent.best_response(&beta)?;
        let u = crate::environment::principal_utility(theta, &beta, &a);
        if u > best.0 {
            best = (u, idx.clone());
        }
        let Some(k) = idx.iter().position(|&i| i + 1 < n) else { break };
        idx[k] += 1;
        idx[..k].iter_mut().for_each(|i| *i = 0);
    }
    Ok(best.1)
}

pub fn random_uniformity_agent(seed: u64) -> AgentType {
    let mut rng = round_rng(seed, 0, Stream::Agent);
    let weights = (0..2).map(|_| rng.random_range(0.5..5.0)).collect();
    AgentType::new(DiagonalPowerCost::new(weights, 2.0).expect("positive weights"))
}

fn uniformity_rows(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<ResultRow>> {
    let agent = random_uniformity_agent(seed);
    let cell = uniformity_argmax(&agent, &UNIFORMITY_THETA, UNIFORMITY_STEP)?;
    let offset = cell
        .iter()
        .zip(UNIFORMITY_THETA)
        .map(|(&i, t)| (i as f64 * UNIFORMITY_STEP - t / agent.degree()).abs())
        .fold(0.0, f64::max);
    let mut row = ResultRow::new(cfg.preset.name(), seed, None, "grid-argmax");
    row.error = Some(offset);
    // Chebyshev distance in grid cells.
    row.value = Some((offset / UNIFORMITY_STEP).round());
    Ok(vec![row])
}

fn run_cell(cfg: &ExperimentConfig, schedule: Option<&EpochSchedule>, cell: &Cell) -> Result<Vec<ResultRow>> {
    match (cfg.preset, cell.horizon) {
        (Preset::FigGmmContractIv | Preset::FigGmmRepeated | Preset::OlsBias, Some(t)) => {
            estimation_cell(cfg, cell.seed, t)
        }
        (Preset::EtcRegret, Some(t)) => {
            Ok(vec![etc_row(cfg.preset, &EnvConfig::experiments(cfg.sigma, cell.seed), cell.seed, t)?])
        }
        (Preset::EpochGreedyRegret, Some(t)) => epoch_rows(cfg, schedule.expect("schedule prepared"), cell.seed, t),
        (Preset::RobustnessSuite, _) => robust_rows(cfg, cell.seed),
        (Preset::UniformityGrid, _) => uniformity_rows(cfg, cell.seed),
        (_, None) => unreachable!("time-indexed presets always carry a horizon"),
    }
}

/// Schedule shared by every epoch-greedy cell: measured once on a fixed
/// probe seed so epoch lengths do not vary across replications.
pub fn epoch_schedule(sigma: f64, delta: f64) -> Result<EpochSchedule> {
    EpochSchedule::for_env(&EnvConfig::diversity(sigma, 0), delta, None, DIVERSITY_SAMPLES)
}

/// Runs every cell of the preset lattice. Cells that fail or exceed the
/// budget become failure rows; rows are ordered by (seed, T, method).
pub fn run_preset(cfg: &ExperimentConfig) -> Result<PresetOutput> {
    cfg.validate()?;
    let schedule = match cfg.preset {
        Preset::EpochGreedyRegret => Some(epoch_schedule(cfg.sigma, cfg.delta)?),
        _ => None,
    };
    let horizons: Vec<Option<usize>> =
        if cfg.preset.uses_horizons() { cfg.horizons.iter().copied().map(Some).collect() } else { vec![None] };
    let cells: Vec<Cell> =
        cfg.seeds.iter().flat_map(|&seed| horizons.iter().map(move |&horizon| Cell { seed, horizon })).collect();
    let name = cfg.preset.name();
    let results = cfg.exec.map(cells, |cell| {
        let start = Instant::now();
        let outcome = run_cell(cfg, schedule.as_ref(), &cell);
        let elapsed = start.elapsed();
        let mut rows = match outcome {
            Ok(rows) => rows,
            Err(e) => {
                vec![ResultRow::failure(name, cell.seed, cell.horizon, primary_method(cfg.preset), &e.to_string())]
            }
        };
        if elapsed > cfg.cell_budget {
            let msg = format!("cell exceeded budget of {:.0} s", cfg.cell_budget.as_secs_f64());
            rows = vec![ResultRow::failure(name, cell.seed, cell.horizon, primary_method(cfg.preset), &msg)];
        }
        if cfg.timing {
            let ms = elapsed.as_secs_f64() * 1e3;
            rows.iter_mut().for_each(|r| r.wall_time_ms = Some(ms));
        }
        rows
    });
    let mut rows: Vec<ResultRow> = results.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.seed, a.horizon, &a.method).cmp(&(b.seed, b.horizon, &b.method)));

    let list = |xs: Vec<String>| xs.join(",");
    let mut comments = vec![
        ("preset".to_string(), name.to_string()),
        ("sigma0".to_string(), cfg.sigma.to_string()),
        ("delta".to_string(), cfg.delta.to_string()),
        ("seeds".to_string(), list(cfg.seeds.iter().map(u64::to_string).collect())),
    ];
    if cfg.preset.uses_horizons() {
        comments.push(("horizons".to_string(), list(cfg.horizons.iter().map(usize::to_string).collect())));
    }
    match cfg.preset {
        Preset::FigGmmContractIv | Preset::FigGmmRepeated | Preset::OlsBias | Preset::EtcRegret => {
            comments.push((
                "environment".to_string(),
                "d=5 theta*=[1,2,3,4,5] cost=sum kappa_i a_i^2 kappa_i in {1,10} box=[0,5]^5".to_string(),
            ));
        }
        Preset::EpochGreedyRegret => {
            comments.push((
                "environment".to_string(),
                "d=5 theta*=[1,2,3,4,5] cost=a'diag(kappa)^-1 a/2 kappa_i in {1,10} box=[0,10]^5".to_string(),
            ));
            if let Some(s) = &schedule {
                comments.push((
                    "schedule".to_string(),
                    format!("K0={} lambda0={} floor={}", s.k0(), s.lambda0(), s.floor().ceil()),
                ));
            }
        }
        Preset::RobustnessSuite => comments.push(("resolution".to_string(), cfg.resolution.to_string())),
        Preset::UniformityGrid => comments
            .push(("grid".to_string(), format!("step={UNIFORMITY_STEP} box=[0,4)^2 theta={UNIFORMITY_THETA:?}"))),
    }
    Ok(PresetOutput { comments, rows })
}
