//! Online contract learning: explore-then-commit with the contract as
//! instrument, pure exploration, and epoch-based greedy exploitation that
//! relies on agent diversity and a repeated signal.
//!
//! The policies themselves are generic over [`Arena`] and never see the true
//! parameter, hidden actions or agent types. The `run_*` wrappers drive a
//! [`Simulation`] and attach the oracle-side regret ledger.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::environment::{Arena, ContractBox, EnvConfig, Observation, RunTrace, Simulation, TraceMode};
use crate::error::{check_dim, Error, Result};
use crate::estimators::{gmm_contract_iv, CrossMoments, Dataset, Estimate};
use crate::model::Contract;
use crate::rng::{round_rng, Stream};

/// Finite exploration law over feasible contracts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationDistribution {
    support: Vec<Contract>,
    cumulative: Vec<f64>,
    probabilities: Vec<f64>,
    c1: f64,
}

impl ExplorationDistribution {
    /// Validates support and weights and records `c₁ = d · λ_min(Σ p_j β_j β_jᵀ)`,
    /// which must be positive.
    pub fn new(support: Vec<Contract>, probabilities: Vec<f64>, contract_box: &ContractBox) -> Result<Self> {
        check_dim(support.len(), probabilities.len())?;
        if support.is_empty() {
            return Err(Error::InvalidParameter("exploration support is empty".into()));
        }
        for b in &support {
            contract_box.check(b)?;
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter("exploration weights must be nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("exploration weights sum to {total}, not 1")));
        }
        let d = contract_box.dim();
        let mut second = DMatrix::zeros(d, d);
        for (b, p) in support.iter().zip(&probabilities) {
            let v = nalgebra::DVector::from_column_slice(b.as_slice());
            second += *p * &v * v.transpose();
        }
        let c1 = d as f64 * lambda_min(&second);
        if !(c1 > 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "exploration second moment is singular (d * lambda_min = {c1:e})"
            )));
        }
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { support, cumulative, probabilities, c1 })
    }

    /// Uniform over `mid ± r·e_i`, `r` half the narrowest box width.
    pub fn default_for_box(contract_box: &ContractBox) -> Result<Self> {
        let mid = contract_box.midpoint();
        let r = 0.5 * contract_box.min_width();
        let d = contract_box.dim();
        let mut support = Vec::with_capacity(2 * d);
        for i in 0..d {
            for sign in [1.0, -1.0] {
                let mut v = mid.as_slice().to_vec();
                v[i] += sign * r;
                support.push(contract_box.clamp(&v));
            }
        }
        Self::new(support, vec![1.0 / (2 * d) as f64; 2 * d], contract_box)
    }

    /// Uniform over the basis contracts stretched to the box.
    pub fn scaled_basis(contract_box: &ContractBox) -> Result<Self> {
        let d = contract_box.dim();
        let support = (0..d).map(|i| contract_box.scaled_basis(i)).collect();
        Self::new(support, vec![1.0 / d as f64; d], contract_box)
    }

    pub fn support(&self) -> &[Contract] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Contract {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|c| *c <= u).min(self.support.len() - 1);
        &self.support[idx]
    }
}

fn lambda_min(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// `λ_min(Σ_{s<n} a_s a_sᵀ)` for best responses to `contract` of `n` agents
/// drawn on a probe stream. Oracle diagnostic.
pub fn response_gram_lambda_min(config: &EnvConfig, contract: &Contract, n_samples: usize) -> Result<f64> {
    let d = config.d();
    check_dim(d, contract.dim())?;
    let mut gram = DMatrix::zeros(d, d);
    for s in 0..n_samples as u64 {
        let mut rng = round_rng(config.seed(), s, Stream::Probe);
        let agent = config.sampler().sample(d, &mut rng);
        let a = nalgebra::DVector::from_vec(agent.best_response(contract)?);
        gram += &a * a.transpose();
    }
    Ok(lambda_min(&gram))
}

/// `λ_min` of the Monte-Carlo mean of `a(β) a(β)ᵀ` over agent draws.
pub fn empirical_lambda_min(config: &EnvConfig, contract: &Contract, n_samples: usize) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    Ok(response_gram_lambda_min(config, contract, n_samples)? / n_samples as f64)
}

/// Largest squared response norm over box corners and the extremes of the
/// agent support. Best responses are separable and monotone per task, so the
/// maximum is a per-coordinate maximum.
pub fn max_response_norm_sq(config: &EnvConfig) -> Result<f64> {
    let d = config.d();
    let corners =
        [Contract::new(config.contract_box().lo().to_vec())?, Contract::new(config.contract_box().hi().to_vec())?];
    let mut best = vec![0.0f64; d];
    for agent in config.sampler().extreme_agents(d) {
        for corner in &corners {
            for (b, a) in best.iter_mut().zip(agent.best_response(corner)?) {
                *b = b.max(a * a);
            }
        }
    }
    Ok(best.iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSchedule {
    d: usize,
    k0: f64,
    lambda0: f64,
    sigma0: f64,
    delta: f64,
}

impl EpochSchedule {
    pub fn new(d: usize, k0: f64, lambda0: f64, sigma0: f64, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("need at least one task".into()));
        }
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::InvalidParameter(format!("response bound {k0} must be positive")));
        }
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::InvalidParameter(format!("diversity level {lambda0} must be positive")));
        }
        if !(sigma0 >= 0.0 && sigma0.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise scale {sigma0} must be >= 0")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} must lie in (0, 1)")));
        }
        Ok(Self { d, k0, lambda0, sigma0, delta })
    }

    /// Response bound from the configuration; diversity level either given
    /// or measured at the box midpoint with a 20% safety margin.
    pub fn for_env(config: &EnvConfig, delta: f64, lambda0: Option<f64>, n_samples: usize) -> Result<Self> {
        let k0 = max_response_norm_sq(config)?;
        let lambda0 = match lambda0 {
            Some(l) => l,
            None => 0.8 * empirical_lambda_min(config, &config.contract_box().midpoint(), n_samples)?,
        };
        Self::new(config.d(), k0, lambda0, config.noise_sigma(), delta)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Minimum length every epoch after the first must reach.
    pub fn floor(&self) -> f64 {
        let d = self.d as f64;
        let chernoff = 8.0 * self.k0 * (d / self.delta).ln() / self.lambda0;
        let noise = 4.0 * self.sigma0 * self.sigma0 * d * d * (d * d / self.delta).ln() / self.lambda0;
        chernoff.max(noise)
    }

    pub fn len(&self, epoch: usize) -> usize {
        if epoch == 0 {
            return self.d;
        }
        let doubling = self.d as f64 * 2f64.powi(epoch.min(1000) as i32);
        let n = doubling.max(self.floor()).ceil();
        if n >= usize::MAX as f64 {
            usize::MAX
        } else {
            n as usize
        }
    }

    /// Epoch lengths covering `horizon` rounds, the last one truncated.
    pub fn lengths(&self, horizon: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut used = 0usize;
        let mut e = 0;
        while used < horizon {
            let n = self.len(e).min(horizon - used);
            out.push(n);
            used += n;
            e += 1;
        }
        out
    }
}

/// Learner-side information: the feasible box, the cost degree and the seed
/// for the learner's own randomization.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub contract_box: &'a ContractBox,
    pub degree: f64,
    pub seed: u64,
}

impl PolicyContext<'_> {
    fn contract_from(&self, theta_hat: &[f64]) -> Contract {
        let scaled: Vec<f64> = theta_hat.iter().map(|t| t / self.degree).collect();
        self.contract_box.clamp(&scaled)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtcDecisions {
    pub exploration_rounds: usize,
    pub estimate: Option<Estimate>,
    pub committed: Option<Contract>,
    /// Set when the exploration data were too ill-conditioned to commit.
    pub degenerate: bool,
}

/// Explores for `⌈d√T⌉` rounds, then commits to the clamped `θ̂/k`.
pub fn explore_then_commit<A: Arena>(
    arena: &mut A,
    horizon: usize,
    exploration: &ExplorationDistribution,
    ctx: PolicyContext<'_>,
) -> Result<EtcDecisions> {
    let d = arena.dim();
    check_dim(d, exploration.dim())?;
    let tau = ((d as f64) * (horizon as f64).sqrt()).ceil() as usize;
    let tau = tau.min(horizon);
    let mut moments = CrossMoments::new(d);
    for t in 0..tau {
        let mut rng = round_rng(ctx.seed, t as u64, Stream::Exploration);
        let o = arena.post(exploration.sample(&mut rng))?;
        moments.push(o.contract.as_slice(), &o.signal_x, o.benefit_y);
    }
    let (estimate, committed) = match moments.solve() {
        Ok(est) => {
            let c = ctx.contract_from(&est.theta_hat);
            (Some(est), Some(c))
        }
        Err(Error::IllConditioned { .. } | Error::InsufficientData { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    for t in tau..horizon {
        match &committed {
            Some(c) => arena.post(c)?,
            None => {
                let mut rng = round_rng(ctx.seed, t as u64, Stream::Exploration);
                arena.post(exploration.sample(&mut rng))?
            }
        };
    }
    Ok(EtcDecisions { exploration_rounds: tau, degenerate: committed.is_none() && horizon > tau, estimate, committed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochDecision {
    pub index: usize,
    pub start: usize,
    pub len: usize,
    /// Estimate from the previous epoch's data; `None` in epoch 0 or when
    /// that data was too ill-conditioned.
    pub estimate: Option<Estimate>,
    /// Contract held fixed through the epoch; `None` in epoch 0, which cycles
    /// through the basis contracts.
    pub contract: Option<Contract>,
    pub flagged: bool,
}

fn second_signal(o: &Observation) -> Result<&[f64]> {
    o.signal_x_tilde.as_deref().ok_or(Error::MissingSecondSignal)
}

/// Epoch 0 posts each stretched basis contract once; every later epoch
/// estimates from the previous epoch only, with the second signal as
/// instrument, and posts the clamped `θ̂/k` throughout.
pub fn epoch_greedy<A: Arena>(
    arena: &mut A,
    horizon: usize,
    schedule: &EpochSchedule,
    ctx: PolicyContext<'_>,
) -> Result<Vec<EpochDecision>> {
    let d = arena.dim();
    check_dim(d, schedule.d())?;
    let mut decisions = Vec::new();
    let mut previous = CrossMoments::new(d);
    let first = d.min(horizon);
    for i in 0..first {
        let o = arena.post(&ctx.contract_box.scaled_basis(i))?;
        previous.push(second_signal(&o)?, &o.signal_x, o.benefit_y);
    }
    decisions.push(EpochDecision { index: 0, start: 0, len: first, estimate: None, contract: None, flagged: false });

    let mut t = first;
    let mut contract = ctx.contract_box.midpoint();
    let mut e = 1;
    while t < horizon {
        let (estimate, flagged) = match previous.solve() {
            Ok(est) => {
                contract = ctx.contract_from(&est.theta_hat);
                (Some(est), false)
            }
            Err(Error::IllConditioned { .. } | Error::InsufficientData { .. }) => (None, true),
            Err(err) => return Err(err),
        };
        let len = schedule.len(e).min(horizon - t);
        let mut current = CrossMoments::new(d);
        for _ in 0..len {
            let o = arena.post(&contract)?;
            current.push(second_signal(&o)?, &o.signal_x, o.benefit_y);
        }
        decisions.push(EpochDecision { index: e, start: t, len, estimate, contract: Some(contract.clone()), flagged });
        previous = current;
        t += len;
        e += 1;
    }
    Ok(decisions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub index: usize,
    pub start: usize,
    pub len: usize,
    pub estimate_sq_error: Option<f64>,
    pub min_singular: Option<f64>,
    pub flagged: bool,
    pub proxy: f64,
    pub utility_regret: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretLedger {
    pub cumulative_proxy: Vec<f64>,
    pub cumulative_utility_regret: Vec<f64>,
    pub per_epoch: Vec<EpochSummary>,
}

impl RegretLedger {
    pub fn from_trace(trace: &RunTrace) -> Self {
        let running = |xs: &[f64]| {
            let mut acc = 0.0;
            xs.iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect::<Vec<_>>()
        };
        Self {
            cumulative_proxy: running(&trace.per_round_regret_proxy),
            cumulative_utility_regret: running(&trace.per_round_utility_regret),
            per_epoch: Vec::new(),
        }
    }

    pub fn total_proxy(&self) -> f64 {
        self.cumulative_proxy.last().copied().unwrap_or(0.0)
    }

    pub fn total_utility_regret(&self) -> f64 {
        self.cumulative_utility_regret.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtcRun {
    pub trace: RunTrace,
    pub ledger: RegretLedger,
    pub decisions: EtcDecisions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochGreedyRun {
    pub trace: RunTrace,
    pub ledger: RegretLedger,
    pub decisions: Vec<EpochDecision>,
}

impl EpochGreedyRun {
    pub fn flagged_epochs(&self) -> usize {
        self.decisions.iter().filter(|e| e.flagged).count()
    }
}

fn context(config: &EnvConfig, degree: f64) -> Result<PolicyContext<'_>> {
    if !(degree > 1.0 && degree.is_finite()) {
        return Err(Error::InvalidParameter(format!("degree {degree} must exceed 1")));
    }
    Ok(PolicyContext { contract_box: config.contract_box(), degree, seed: config.seed() })
}

pub fn run_etc(
    config: &EnvConfig,
    horizon: usize,
    exploration: &ExplorationDistribution,
    degree: f64,
    mode: TraceMode,
) -> Result<EtcRun> {
    let d = config.d();
    if horizon < d * d {
        return Err(Error::InsufficientData { rows: horizon, dim: d * d });
    }
    for b in exploration.support() {
        config.contract_box().check(b)?;
    }
    let ctx = context(config, degree)?;
    let mut sim = Simulation::new(config, mode);
    let decisions = explore_then_commit(&mut sim, horizon, exploration, ctx)?;
    let trace = sim.finish();
    let ledger = RegretLedger::from_trace(&trace);
    Ok(EtcRun { trace, ledger, decisions })
}

/// Posts `β_t ~ P` for all `T` rounds and returns the data.
pub fn collect_exploration_dataset(
    config: &EnvConfig,
    horizon: usize,
    exploration: &ExplorationDistribution,
) -> Result<Dataset> {
    check_dim(config.d(), exploration.dim())?;
    let mut sim = Simulation::new(config, TraceMode::RegretOnly);
    let mut data = Dataset::empty(config.d(), config.repeated_signals());
    for t in 0..horizon {
        let mut rng = round_rng(config.seed(), t as u64, Stream::Exploration);
        let o = sim.post(exploration.sample(&mut rng))?;
        data.push(&o)?;
    }
    Ok(data)
}

/// Pure exploration followed by the contract-as-instrument estimate with the
/// error bound at confidence `1 − delta` attached.
pub fn run_pure_exploration(
    config: &EnvConfig,
    horizon: usize,
    exploration: &ExplorationDistribution,
    delta: f64,
) -> Result<Estimate> {
    if horizon < config.d() {
        return Err(Error::InsufficientData { rows: horizon, dim: config.d() });
    }
    let data = collect_exploration_dataset(config, horizon, exploration)?;
    gmm_contract_iv(&data)?.with_bound(delta)
}

pub fn run_epoch_greedy(
    config: &EnvConfig,
    horizon: usize,
    schedule: &EpochSchedule,
    degree: f64,
    mode: TraceMode,
) -> Result<EpochGreedyRun> {
    if !config.repeated_signals() {
        return Err(Error::MissingSecondSignal);
    }
    let ctx = context(config, degree)?;
    let mut sim = Simulation::new(config, mode);
    let decisions = epoch_greedy(&mut sim, horizon, schedule, ctx)?;
    let trace = sim.finish();
    let mut ledger = RegretLedger::from_trace(&trace);
    ledger.per_epoch = decisions
        .iter()
        .map(|e| {
            let range = e.start..e.start + e.len;
            EpochSummary {
                index: e.index,
                start: e.start,
                len: e.len,
                estimate_sq_error: e.estimate.as_ref().map(|est| est.squared_error(config.theta_star())),
                min_singular: e.estimate.as_ref().map(|est| est.min_singular),
                flagged: e.flagged,
                proxy: trace.per_round_regret_proxy[range.clone()].iter().sum(),
                utility_regret: trace.per_round_utility_regret[range].iter().sum(),
            }
        })
        .collect();
    Ok(EpochGreedyRun { trace, ledger, decisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{AgentSampler, CostForm};
    use crate::model::{AgentType, DiagonalPowerCost};
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_exploration_is_in_box_and_spanning() {
        let b = ContractBox::cube(5, 0.0, 5.0).unwrap();
        let p = ExplorationDistribution::default_for_box(&b).unwrap();
        assert_eq!(p.support().len(), 10);
        assert!(p.support().iter().all(|c| b.contains(c)));
        assert!(p.c1() > 0.0);
        let flat = ContractBox::cube(2, 1.0, 1.0).unwrap();
        assert!(ExplorationDistribution::default_for_box(&flat).is_err());
    }

    #[test]
    fn sampling_follows_weights() {
        let b = ContractBox::cube(2, 0.0, 1.0).unwrap();
        let support = vec![b.scaled_basis(0), b.scaled_basis(1)];
        let p = ExplorationDistribution::new(support, vec![0.25, 0.75], &b).unwrap();
        let mut hits = 0;
        for t in 0..4000u64 {
            let mut rng = round_rng(1, t, Stream::Exploration);
            if p.sample(&mut rng).as_slice()[0] == 1.0 {
                hits += 1;
            }
        }
        assert!((hits as f64 / 4000.0 - 0.25).abs() < 0.03);
    }

    #[test]
    fn schedule_lengths() {
        let s = EpochSchedule::new(5, 1.0, 1000.0, 0.0, 0.5).unwrap();
        assert_eq!(s.len(0), 5);
        assert_eq!(s.len(1), 10);
        assert_eq!(s.len(3), 40);
        let lens = s.lengths(100);
        assert_eq!(lens, vec![5, 10, 20, 40, 25]);
        let heavy = EpochSchedule::new(5, 50_000.0, 405.0, 1.0, 0.05).unwrap();
        assert_eq!(heavy.len(1), heavy.floor().ceil() as usize);
        assert!(EpochSchedule::new(5, 1.0, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn response_bound_matches_corner() {
        let cfg = EnvConfig::diversity(1.0, 0);
        // κ = 10 at β = 10 gives a_i = 100 on every task.
        assert_abs_diff_eq!(max_response_norm_sq(&cfg).unwrap(), 5.0 * 100.0 * 100.0, epsilon = 1e-9);
    }

    #[test]
    fn rank_one_population_has_no_diversity() {
        let agent = AgentType::new(DiagonalPowerCost::new(vec![1.0, 1.0], 2.0).unwrap());
        let cfg = EnvConfig::new(
            vec![1.0, 1.0],
            0.0,
            AgentSampler::Fixed(agent),
            ContractBox::cube(2, 0.0, 1.0).unwrap(),
            true,
            0,
        )
        .unwrap();
        let beta = Contract::new(vec![1.0, 1.0]).unwrap();
        assert!(empirical_lambda_min(&cfg, &beta, 100).unwrap().abs() < 1e-12);
    }

    #[test]
    fn noiseless_etc_commits_to_optimum() {
        let cfg = EnvConfig::experiments(0.0, 2);
        let p = ExplorationDistribution::default_for_box(cfg.contract_box()).unwrap();
        let run = run_etc(&cfg, 400, &p, 2.0, TraceMode::Full).unwrap();
        let tau = run.decisions.exploration_rounds;
        assert_eq!(tau, 100);
        let committed = run.decisions.committed.unwrap();
        for (c, t) in committed.as_slice().iter().zip(cfg.theta_star()) {
            assert_abs_diff_eq!(*c, t / 2.0, epsilon = 1e-9);
        }
        assert!(run.trace.per_round_regret_proxy[tau..].iter().all(|r| *r < 1e-16));
    }

    #[test]
    fn etc_needs_enough_rounds() {
        let cfg = EnvConfig::experiments(1.0, 0);
        let p = ExplorationDistribution::default_for_box(cfg.contract_box()).unwrap();
        assert!(matches!(run_etc(&cfg, 24, &p, 2.0, TraceMode::Full), Err(Error::InsufficientData { .. })));
        assert!(matches!(run_pure_exploration(&cfg, 4, &p, 0.1), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn noiseless_epoch_greedy_is_exact_after_first_epoch() {
        let cfg = EnvConfig::new(
            vec![1.0, 2.0, 3.0],
            0.0,
            AgentSampler::TwoPoint { low: 1.0, high: 10.0, form: CostForm::InverseDiagonal },
            ContractBox::cube(3, 0.0, 10.0).unwrap(),
            true,
            9,
        )
        .unwrap();
        let schedule = EpochSchedule::new(3, 1.0, 1.0, 0.0, 0.5).unwrap();
        let run = run_epoch_greedy(&cfg, 200, &schedule, 2.0, TraceMode::Full).unwrap();
        assert!(run.decisions.len() > 3);
        for e in &run.ledger.per_epoch[1..] {
            assert!(e.proxy < 1e-16, "epoch {} proxy {}", e.index, e.proxy);
            assert!(e.estimate_sq_error.unwrap() < 1e-18);
        }
    }

    #[test]
    fn epoch_greedy_needs_second_signal() {
        let cfg = EnvConfig::diversity(1.0, 0).with_repeated_signals(false);
        let schedule = EpochSchedule::new(5, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            run_epoch_greedy(&cfg, 100, &schedule, 2.0, TraceMode::RegretOnly),
            Err(Error::MissingSecondSignal)
        ));
    }
}
