//! Seeded simulator of the hidden-action interaction protocol.
//!
//! Each round the principal posts a contract, a freshly sampled agent best
//! responds with a hidden action, and the principal observes noisy signals of
//! that action plus a noisy private benefit. Learners only ever see an
//! [`Observation`]; hidden actions and agent types stay on the simulator side
//! where they feed the regret ledger.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::model::{optimal_contract, AgentType, Contract, DiagonalPowerCost};
use crate::rng::{round_rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct ContractBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ContractBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && *l >= 0.0 && l <= h) {
                return Err(Error::InvalidParameter(format!("box component {i}: need 0 <= lo <= hi, got [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn check(&self, contract: &Contract) -> Result<()> {
        check_dim(self.dim(), contract.dim())?;
        for (index, ((&value, &lo), &hi)) in contract.as_slice().iter().zip(&self.lo).zip(&self.hi).enumerate() {
            if value < lo || value > hi {
                return Err(Error::OutsideBox { index, value, lo, hi });
            }
        }
        Ok(())
    }

    pub fn contains(&self, contract: &Contract) -> bool {
        self.check(contract).is_ok()
    }

    /// Componentwise projection into the box. Non-finite entries map to the
    /// midpoint of their interval.
    pub fn clamp(&self, beta: &[f64]) -> Contract {
        let v = beta
            .iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .map(|((b, l), h)| if b.is_finite() { b.clamp(*l, *h) } else { 0.5 * (l + h) })
            .collect();
        Contract::new(v).expect("box bounds are nonnegative")
    }

    pub fn midpoint(&self) -> Contract {
        Contract::new(self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect())
            .expect("box bounds are nonnegative")
    }

    pub fn min_width(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min)
    }

    /// Basis direction `e_i` stretched to the box: `lo + (hi − lo) ⊙ e_i`.
    pub fn scaled_basis(&self, i: usize) -> Contract {
        let mut v = self.lo.clone();
        v[i] = self.hi[i];
        Contract::new(v).expect("box bounds are nonnegative")
    }
}

/// How a per-task talent vector `κ` becomes a cost function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostForm {
    /// `Σ κ_i a_i²`, best response `β_i / (2κ_i)`.
    SumOfSquares,
    /// `½ aᵀ diag(κ)⁻¹ a`, best response `κ_i β_i`.
    InverseDiagonal,
}

impl CostForm {
    pub fn build(self, kappa: &[f64]) -> Result<DiagonalPowerCost> {
        match self {
            CostForm::SumOfSquares => DiagonalPowerCost::sum_of_squares(kappa),
            CostForm::InverseDiagonal => DiagonalPowerCost::inverse_diagonal_quadratic(kappa),
        }
    }
}

/// Distribution `D` over agent types.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentSampler {
    /// Each `κ_i` independently equal to `low` or `high` with probability ½.
    TwoPoint {
        low: f64,
        high: f64,
        form: CostForm,
    },
    /// Each `κ_i` independently log-uniform on `[min, max]`.
    LogUniform {
        min: f64,
        max: f64,
        form: CostForm,
    },
    Fixed(AgentType),
}

impl AgentSampler {
    fn validate(&self, d: usize) -> Result<()> {
        match self {
            AgentSampler::TwoPoint { low: a, high: b, .. } | AgentSampler::LogUniform { min: a, max: b, .. } => {
                if !(*a > 0.0 && a <= b && b.is_finite()) {
                    return Err(Error::InvalidParameter(format!("talent range [{a}, {b}] is invalid")));
                }
                Ok(())
            }
            AgentSampler::Fixed(agent) => check_dim(d, agent.dim()),
        }
    }

    pub fn degree(&self) -> f64 {
        match self {
            AgentSampler::Fixed(agent) => agent.degree(),
            _ => 2.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> AgentType {
        let kappa = |draw: &mut dyn FnMut() -> f64| (0..d).map(|_| draw()).collect::<Vec<_>>();
        let cost = match self {
            AgentSampler::TwoPoint { low, high, form } => {
                form.build(&kappa(&mut || if rng.random_bool(0.5) { *low } else { *high }))
            }
            AgentSampler::LogUniform { min, max, form } => {
                let (l, h) = (min.ln(), max.ln());
                form.build(&kappa(&mut || (l + (h - l) * rng.random::<f64>()).exp()))
            }
            AgentSampler::Fixed(agent) => return agent.clone(),
        };
        AgentType::new(cost.expect("validated talent range"))
    }

    /// Homogeneous extremes of the support. Best responses are monotone in
    /// each talent coordinate, so per-task maxima over these bound every type.
    pub fn extreme_agents(&self, d: usize) -> Vec<AgentType> {
        match self {
            AgentSampler::TwoPoint { low, high, form } | AgentSampler::LogUniform { min: low, max: high, form } => {
                [*low, *high]
                    .iter()
                    .map(|k| AgentType::new(form.build(&vec![*k; d]).expect("validated talent range")))
                    .collect()
            }
            AgentSampler::Fixed(agent) => vec![agent.clone()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    d: usize,
    theta_star: Vec<f64>,
    noise_sigma: f64,
    sampler: AgentSampler,
    contract_box: ContractBox,
    repeated_signals: bool,
    seed: u64,
}

impl EnvConfig {
    pub fn new(
        theta_star: Vec<f64>,
        noise_sigma: f64,
        sampler: AgentSampler,
        contract_box: ContractBox,
        repeated_signals: bool,
        seed: u64,
    ) -> Result<Self> {
        let d = theta_star.len();
        if d == 0 {
            return Err(Error::InvalidParameter("need at least one task".into()));
        }
        if theta_star.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidParameter("theta* must be finite and nonnegative".into()));
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise scale {noise_sigma} must be >= 0")));
        }
        check_dim(d, contract_box.dim())?;
        sampler.validate(d)?;
        let beta_star = optimal_contract(&theta_star, sampler.degree())?;
        contract_box.check(&beta_star)?;
        Ok(Self { d, theta_star, noise_sigma, sampler, contract_box, repeated_signals, seed })
    }

    /// `d = 5`, `θ* = [1,2,3,4,5]`, cost `Σ κ_i a_i²` with `κ_i ∈ {1, 10}`,
    /// contract box `[0, 5]^5`, repeated signals on.
    pub fn experiments(noise_sigma: f64, seed: u64) -> Self {
        Self::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            noise_sigma,
            AgentSampler::TwoPoint { low: 1.0, high: 10.0, form: CostForm::SumOfSquares },
            ContractBox::cube(5, 0.0, 5.0).expect("static box"),
            true,
            seed,
        )
        .expect("static configuration is valid")
    }

    /// Diverse-talent setting: cost `½ aᵀ diag(κ)⁻¹ a` (response `κ ⊙ β`),
    /// `κ_i ∈ {1, 10}`, box `[0, 10]^5`, repeated signals on.
    pub fn diversity(noise_sigma: f64, seed: u64) -> Self {
        Self::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            noise_sigma,
            AgentSampler::TwoPoint { low: 1.0, high: 10.0, form: CostForm::InverseDiagonal },
            ContractBox::cube(5, 0.0, 10.0).expect("static box"),
            true,
            seed,
        )
        .expect("static configuration is valid")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise scale {noise_sigma} must be >= 0")));
        }
        self.noise_sigma = noise_sigma;
        Ok(self)
    }

    pub fn with_repeated_signals(mut self, on: bool) -> Self {
        self.repeated_signals = on;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn sampler(&self) -> &AgentSampler {
        &self.sampler
    }

    pub fn contract_box(&self) -> &ContractBox {
        &self.contract_box
    }

    pub fn repeated_signals(&self) -> bool {
        self.repeated_signals
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn degree(&self) -> f64 {
        self.sampler.degree()
    }

    pub fn optimal_contract(&self) -> Contract {
        optimal_contract(&self.theta_star, self.degree()).expect("validated at construction")
    }
}

/// What the principal sees after one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub contract: Contract,
    pub signal_x: Vec<f64>,
    pub signal_x_tilde: Option<Vec<f64>>,
    pub benefit_y: f64,
}

/// A full round including the hidden action.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    contract: Contract,
    action: Vec<f64>,
    signal_x: Vec<f64>,
    signal_x_tilde: Option<Vec<f64>>,
    benefit_y: f64,
}

impl InteractionRecord {
    pub fn contract(&self) -> &Contract {
        &self.contract
    }

    /// Oracle access only; never part of what a learner receives.
    pub fn hidden_action(&self) -> &[f64] {
        &self.action
    }

    pub fn signal_x(&self) -> &[f64] {
        &self.signal_x
    }

    pub fn signal_x_tilde(&self) -> Option<&[f64]> {
        self.signal_x_tilde.as_deref()
    }

    pub fn benefit_y(&self) -> f64 {
        self.benefit_y
    }

    pub fn observe(&self) -> Observation {
        Observation {
            contract: self.contract.clone(),
            signal_x: self.signal_x.clone(),
            signal_x_tilde: self.signal_x_tilde.clone(),
            benefit_y: self.benefit_y,
        }
    }
}

/// Agent type of `round`; deterministic in `(seed, round)`.
pub fn sample_agent(config: &EnvConfig, round: u64) -> AgentType {
    let mut rng = round_rng(config.seed, round, Stream::Agent);
    config.sampler.sample(config.d, &mut rng)
}

fn noisy(mean: &[f64], sigma: f64, seed: u64, round: u64, stream: Stream) -> Vec<f64> {
    let mut rng = round_rng(seed, round, stream);
    mean.iter()
        .map(|m| {
            let z: f64 = StandardNormal.sample(&mut rng);
            m + sigma * z
        })
        .collect()
}

/// One round of the protocol with Gaussian noise of scale `σ₀` on every
/// signal component and on the benefit.
pub fn interact(config: &EnvConfig, contract: &Contract, agent: &AgentType, round: u64) -> Result<InteractionRecord> {
    config.contract_box.check(contract)?;
    let action = agent.best_response(contract)?;
    let sigma = config.noise_sigma;
    let signal_x = noisy(&action, sigma, config.seed, round, Stream::SignalX);
    let signal_x_tilde =
        config.repeated_signals.then(|| noisy(&action, sigma, config.seed, round, Stream::SignalXTilde));
    let mean_y: f64 = config.theta_star.iter().zip(&action).map(|(t, a)| t * a).sum();
    let benefit_y = noisy(&[mean_y], sigma, config.seed, round, Stream::Benefit)[0];
    Ok(InteractionRecord { contract: contract.clone(), action, signal_x, signal_x_tilde, benefit_y })
}

/// `⟨θ, a⟩ − ⟨β, a⟩`.
pub fn principal_utility(theta: &[f64], contract: &Contract, action: &[f64]) -> f64 {
    theta.iter().zip(action).map(|(t, a)| t * a).sum::<f64>() - contract.expected_payment(action)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRegret {
    /// `‖β* − β_t‖²`
    pub proxy: f64,
    /// `u(β*) − u(β_t)` under the round's agent, noiseless.
    pub utility: f64,
}

pub fn oracle_round_regret(config: &EnvConfig, contract: &Contract, agent: &AgentType) -> Result<RoundRegret> {
    let beta_star = config.optimal_contract();
    let proxy = beta_star.squared_distance(contract);
    let best = principal_utility(&config.theta_star, &beta_star, &agent.best_response(&beta_star)?);
    let got = principal_utility(&config.theta_star, contract, &agent.best_response(contract)?);
    let mut utility = best - got;
    // β* maximizes every agent's induced utility; anything below zero is rounding.
    if utility < 0.0 && utility > -1e-12 * (1.0 + best.abs()) {
        utility = 0.0;
    }
    Ok(RoundRegret { proxy, utility })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<InteractionRecord>,
    pub posted_contracts: Vec<Contract>,
    pub agent_types: Vec<AgentType>,
    pub per_round_regret_proxy: Vec<f64>,
    pub per_round_utility_regret: Vec<f64>,
}

impl RunTrace {
    pub fn rounds(&self) -> usize {
        self.per_round_regret_proxy.len()
    }

    pub fn cumulative_proxy(&self) -> f64 {
        self.per_round_regret_proxy.iter().sum()
    }

    pub fn cumulative_utility_regret(&self) -> f64 {
        self.per_round_utility_regret.iter().sum()
    }
}

/// The principal's side of the protocol: post a contract, get an observation.
pub trait Arena {
    fn dim(&self) -> usize;
    fn post(&mut self, contract: &Contract) -> Result<Observation>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Keep records, contracts and agent types.
    Full,
    /// Keep only the per-round regret series.
    RegretOnly,
}

/// Simulated arena that numbers rounds from zero and logs the oracle view.
#[derive(Debug)]
pub struct Simulation<'a> {
    config: &'a EnvConfig,
    mode: TraceMode,
    round: u64,
    trace: RunTrace,
}

impl<'a> Simulation<'a> {
    pub fn new(config: &'a EnvConfig, mode: TraceMode) -> Self {
        Self { config, mode, round: 0, trace: RunTrace::default() }
    }

    pub fn config(&self) -> &EnvConfig {
        self.config
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn finish(self) -> RunTrace {
        self.trace
    }
}

impl Arena for Simulation<'_> {
    fn dim(&self) -> usize {
        self.config.d
    }

    fn post(&mut self, contract: &Contract) -> Result<Observation> {
        let agent = sample_agent(self.config, self.round);
        let record = interact(self.config, contract, &agent, self.round)?;
        let regret = oracle_round_regret(self.config, contract, &agent)?;
        self.round += 1;
        let observation = record.observe();
        self.trace.per_round_regret_proxy.push(regret.proxy);
        self.trace.per_round_utility_regret.push(regret.utility);
        if self.mode == TraceMode::Full {
            self.trace.posted_contracts.push(contract.clone());
            self.trace.agent_types.push(agent);
            self.trace.records.push(record);
        }
        Ok(observation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic_agent(kappa: &[f64]) -> AgentType {
        AgentType::new(DiagonalPowerCost::inverse_diagonal_quadratic(kappa).unwrap())
    }

    #[test]
    fn noiseless_round_is_exact() {
        let cfg = EnvConfig::diversity(0.0, 3);
        let agent = quadratic_agent(&[2.0, 3.0, 1.0, 1.0, 1.0]);
        let beta = Contract::new(vec![1.0; 5]).unwrap();
        let rec = interact(&cfg, &beta, &agent, 0).unwrap();
        assert_eq!(rec.hidden_action(), &[2.0, 3.0, 1.0, 1.0, 1.0]);
        assert_eq!(rec.signal_x(), rec.hidden_action());
        assert_eq!(rec.signal_x_tilde().unwrap(), rec.hidden_action());
        assert_abs_diff_eq!(rec.benefit_y(), 2.0 + 6.0 + 3.0 + 4.0 + 5.0, epsilon = 1e-12);
    }

    #[test]
    fn rounds_are_reproducible() {
        let cfg = EnvConfig::experiments(0.1, 11);
        let beta = Contract::new(vec![1.0; 5]).unwrap();
        let agent = sample_agent(&cfg, 4);
        assert_eq!(agent, sample_agent(&cfg, 4));
        let a = interact(&cfg, &beta, &agent, 4).unwrap();
        let b = interact(&cfg, &beta, &agent, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, interact(&cfg, &beta, &agent, 5).unwrap());
    }

    #[test]
    fn contract_outside_box_is_refused() {
        let cfg = EnvConfig::experiments(0.1, 0);
        let agent = sample_agent(&cfg, 0);
        let beta = Contract::new(vec![6.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(interact(&cfg, &beta, &agent, 0), Err(Error::OutsideBox { index: 0, .. })));
    }

    #[test]
    fn experiments_sampler_uses_two_talent_levels() {
        let cfg = EnvConfig::experiments(1.0, 5);
        let agent = sample_agent(&cfg, 0);
        for w in agent.cost.weights() {
            assert!(*w == 2.0 || *w == 20.0);
        }
        let fixed = quadratic_agent(&[1.0, 2.0]);
        let cfg = EnvConfig::new(
            vec![1.0, 1.0],
            0.0,
            AgentSampler::Fixed(fixed.clone()),
            ContractBox::cube(2, 0.0, 1.0).unwrap(),
            false,
            0,
        )
        .unwrap();
        assert_eq!(sample_agent(&cfg, 17), fixed);
    }

    #[test]
    fn principal_utility_examples() {
        let beta = Contract::new(vec![0.5, 1.0]).unwrap();
        assert_abs_diff_eq!(principal_utility(&[1.0, 2.0], &beta, &[1.0, 1.0]), 1.5, epsilon = 1e-12);
        let full = Contract::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(principal_utility(&[1.0, 2.0], &full, &[0.3, 0.9]), 0.0);
    }

    #[test]
    fn round_regret_one_dimensional() {
        let agent = AgentType::new(DiagonalPowerCost::new(vec![1.0], 2.0).unwrap());
        let cfg = EnvConfig::new(
            vec![2.0],
            0.0,
            AgentSampler::Fixed(agent.clone()),
            ContractBox::cube(1, 0.0, 2.0).unwrap(),
            false,
            0,
        )
        .unwrap();
        let r = oracle_round_regret(&cfg, &Contract::new(vec![0.9]).unwrap(), &agent).unwrap();
        assert_abs_diff_eq!(r.proxy, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(r.utility, 0.01, epsilon = 1e-12);
        let r = oracle_round_regret(&cfg, &Contract::new(vec![1.0]).unwrap(), &agent).unwrap();
        assert_eq!((r.proxy, r.utility), (0.0, 0.0));
    }

    #[test]
    fn optimum_outside_box_is_rejected() {
        let err = EnvConfig::new(
            vec![1.0, 8.0],
            1.0,
            AgentSampler::TwoPoint { low: 1.0, high: 2.0, form: CostForm::SumOfSquares },
            ContractBox::cube(2, 0.0, 3.0).unwrap(),
            false,
            0,
        );
        assert!(matches!(err, Err(Error::OutsideBox { index: 1, .. })));
    }

    #[test]
    fn box_helpers() {
        let b = ContractBox::new(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert_eq!(b.midpoint().as_slice(), &[1.0, 1.5]);
        assert_eq!(b.min_width(), 1.0);
        assert_eq!(b.clamp(&[-1.0, 5.0]).as_slice(), &[0.0, 2.0]);
        assert_eq!(b.clamp(&[f64::NAN, 1.2]).as_slice(), &[1.0, 1.2]);
        assert_eq!(b.scaled_basis(1).as_slice(), &[0.0, 2.0]);
        assert!(ContractBox::new(vec![2.0], vec![1.0]).is_err());
    }
}
