//! Just-identified GMM estimators of the principal's benefit vector.
//!
//! Signals are noisy copies of the hidden action, so regressing the benefit
//! on them is an errors-in-variables problem and plain least squares is
//! biased toward zero. Both IV estimators fix this with an instrument that is
//! correlated with the action but independent of the signal noise: either the
//! posted contract itself or an independent second signal.

use nalgebra::{DMatrix, DVector};

use crate::environment::Observation;
use crate::error::{check_dim, Error, Result};

/// Solves are refused when `σ_min < SINGULARITY_RATIO · σ_max`.
pub const SINGULARITY_RATIO: f64 = 1e-10;

/// Row-major record of `T` rounds: contracts `B`, signals `X`, optional
/// second signals `X̃` and benefits `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    contracts: Vec<f64>,
    signals: Vec<f64>,
    second_signals: Option<Vec<f64>>,
    benefits: Vec<f64>,
}

impl Dataset {
    /// Empty dataset; `with_second_signal` decides whether `X̃` is kept.
    pub fn empty(d: usize, with_second_signal: bool) -> Self {
        Self {
            d,
            contracts: Vec::new(),
            signals: Vec::new(),
            second_signals: with_second_signal.then(Vec::new),
            benefits: Vec::new(),
        }
    }

    /// Builds from per-round rows. `second_signals` must be `None` or have one
    /// row per round.
    pub fn from_rows(
        contracts: &[Vec<f64>],
        signals: &[Vec<f64>],
        second_signals: Option<&[Vec<f64>]>,
        benefits: &[f64],
    ) -> Result<Self> {
        let t = benefits.len();
        let d = contracts.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::InvalidParameter("dataset needs at least one row and one column".into()));
        }
        check_dim(t, contracts.len())?;
        check_dim(t, signals.len())?;
        let mut data = Self::empty(d, second_signals.is_some());
        if let Some(s) = second_signals {
            check_dim(t, s.len())?;
        }
        for i in 0..t {
            let second = second_signals.map(|s| s[i].as_slice());
            data.push_row(&contracts[i], &signals[i], second, benefits[i])?;
        }
        Ok(data)
    }

    pub fn from_observations(observations: &[Observation]) -> Result<Self> {
        let first = observations.first().ok_or(Error::InsufficientData { rows: 0, dim: 1 })?;
        let mut data = Self::empty(first.contract.dim(), first.signal_x_tilde.is_some());
        for o in observations {
            data.push(o)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, o: &Observation) -> Result<()> {
        self.push_row(o.contract.as_slice(), &o.signal_x, o.signal_x_tilde.as_deref(), o.benefit_y)
    }

    pub fn push_row(&mut self, contract: &[f64], signal: &[f64], second: Option<&[f64]>, benefit: f64) -> Result<()> {
        check_dim(self.d, contract.len())?;
        check_dim(self.d, signal.len())?;
        match (&mut self.second_signals, second) {
            (Some(store), Some(s)) => {
                check_dim(self.d, s.len())?;
                store.extend_from_slice(s);
            }
            (None, None) => {}
            (None, Some(_)) => {}
            (Some(_), None) => return Err(Error::MissingSecondSignal),
        }
        self.contracts.extend_from_slice(contract);
        self.signals.extend_from_slice(signal);
        self.benefits.push(benefit);
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.benefits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.benefits.is_empty()
    }

    pub fn contract_row(&self, t: usize) -> &[f64] {
        &self.contracts[t * self.d..(t + 1) * self.d]
    }

    pub fn signal_row(&self, t: usize) -> &[f64] {
        &self.signals[t * self.d..(t + 1) * self.d]
    }

    pub fn second_signal_row(&self, t: usize) -> Option<&[f64]> {
        self.second_signals.as_ref().map(|s| &s[t * self.d..(t + 1) * self.d])
    }

    pub fn has_second_signal(&self) -> bool {
        self.second_signals.is_some()
    }

    pub fn benefits(&self) -> &[f64] {
        &self.benefits
    }

    /// `B` as a `T × d` matrix.
    pub fn contract_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.d, &self.contracts)
    }

    /// `X` as a `T × d` matrix.
    pub fn signal_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.d, &self.signals)
    }

    pub fn second_signal_matrix(&self) -> Option<DMatrix<f64>> {
        self.second_signals.as_ref().map(|s| DMatrix::from_row_slice(self.len(), self.d, s))
    }

    fn instrument_row(&self, instrument: Instrument, t: usize) -> Result<&[f64]> {
        match instrument {
            Instrument::Contract => Ok(self.contract_row(t)),
            Instrument::SecondSignal => self.second_signal_row(t).ok_or(Error::MissingSecondSignal),
            Instrument::Signal => Ok(self.signal_row(t)),
        }
    }

    fn moments(&self, instrument: Instrument) -> Result<CrossMoments> {
        let mut m = CrossMoments::new(self.d);
        for t in 0..self.len() {
            m.push(self.instrument_row(instrument, t)?, self.signal_row(t), self.benefits[t]);
        }
        Ok(m)
    }
}

/// Which per-round vector multiplies the moment condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instrument {
    Contract,
    SecondSignal,
    /// The signal itself, i.e. ordinary least squares.
    Signal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub theta_hat: Vec<f64>,
    pub min_singular: f64,
    pub sample_size: usize,
    pub bound: Option<f64>,
}

impl Estimate {
    /// Attaches the high-probability error bound at confidence `1 − delta`.
    pub fn with_bound(mut self, delta: f64) -> Result<Self> {
        self.bound = Some(error_bound_contract_iv(self.sample_size, self.theta_hat.len(), delta, self.min_singular)?);
        Ok(self)
    }

    pub fn error(&self, theta_star: &[f64]) -> f64 {
        self.squared_error(theta_star).sqrt()
    }

    pub fn squared_error(&self, theta_star: &[f64]) -> f64 {
        self.theta_hat.iter().zip(theta_star).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Streaming accumulator of `Σ z_t x_tᵀ` and `Σ z_t y_t` for instrument `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMoments {
    d: usize,
    cross: Vec<f64>,
    rhs: Vec<f64>,
    n: usize,
}

impl CrossMoments {
    pub fn new(d: usize) -> Self {
        Self { d, cross: vec![0.0; d * d], rhs: vec![0.0; d], n: 0 }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn push(&mut self, instrument: &[f64], regressor: &[f64], response: f64) {
        debug_assert_eq!(instrument.len(), self.d);
        debug_assert_eq!(regressor.len(), self.d);
        for (i, zi) in instrument.iter().enumerate() {
            let row = &mut self.cross[i * self.d..(i + 1) * self.d];
            for (c, xj) in row.iter_mut().zip(regressor) {
                *c += zi * xj;
            }
            self.rhs[i] += zi * response;
        }
        self.n += 1;
    }

    pub fn cross_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.cross)
    }

    /// Exact solution of `(Σ z xᵀ) θ = Σ z y` through an SVD.
    pub fn solve(&self) -> Result<Estimate> {
        if self.n < self.d {
            return Err(Error::InsufficientData { rows: self.n, dim: self.d });
        }
        let svd = self.cross_matrix().svd(true, true);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        if !(sigma_max > 0.0) || sigma_min < SINGULARITY_RATIO * sigma_max {
            return Err(Error::IllConditioned { sigma_min, sigma_max });
        }
        let theta = svd
            .solve(&DVector::from_column_slice(&self.rhs), 0.0)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Estimate {
            theta_hat: theta.iter().copied().collect(),
            min_singular: sigma_min,
            sample_size: self.n,
            bound: None,
        })
    }
}

/// Contract as instrument: `θ̂ = (BᵀX)⁻¹ BᵀY`.
pub fn gmm_contract_iv(data: &Dataset) -> Result<Estimate> {
    data.moments(Instrument::Contract)?.solve()
}

/// Second signal as instrument: `θ̂ = (X̃ᵀX)⁻¹ X̃ᵀY`.
pub fn gmm_repeated_iv(data: &Dataset) -> Result<Estimate> {
    if !data.has_second_signal() {
        return Err(Error::MissingSecondSignal);
    }
    data.moments(Instrument::SecondSignal)?.solve()
}

/// Least squares on the noisy signals, `θ̂ = (XᵀX)⁻¹ XᵀY`. Biased toward zero
/// whenever the signals are noisy; kept as a baseline.
pub fn ols_naive(data: &Dataset) -> Result<Estimate> {
    data.moments(Instrument::Signal)?.solve()
}

pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.min()
}

/// `√(d·T·ln(d·T/δ)) / σ_min`.
pub fn error_bound_contract_iv(t: usize, d: usize, delta: f64, sigma_min: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} must lie in (0, 1)")));
    }
    if !(sigma_min > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma_min {sigma_min} must be positive")));
    }
    let dt = (d * t) as f64;
    Ok(bound_from_log_term(dt, (dt / delta).ln(), sigma_min))
}

fn bound_from_log_term(dt: f64, log_term: f64, sigma_min: f64) -> f64 {
    (dt * log_term).sqrt() / sigma_min
}

/// Deviation bound for a sum of `T` independent `σ`-subgaussian scalars times
/// instruments of squared norm at most `C`: `√(2dCσT ln(Td/δ))`.
pub fn residual_deviation_bound(t: usize, d: usize, instrument_norm_sq: f64, sigma: f64, delta: f64) -> f64 {
    let (t, d) = (t as f64, d as f64);
    (2.0 * d * instrument_norm_sq * sigma * t * (t * d / delta).ln()).sqrt()
}

/// Oracle diagnostic: `‖Σ_t (y_t − ⟨θ*, x_t⟩) b_t‖` with contract rows `b_t`.
/// Reads the true parameter, so it belongs in tests and diagnostics only.
pub fn residual_deviation_check(data: &Dataset, theta_star: &[f64]) -> Result<f64> {
    residual_deviation_with(data, theta_star, Instrument::Contract)
}

pub fn residual_deviation_with(data: &Dataset, theta_star: &[f64], instrument: Instrument) -> Result<f64> {
    check_dim(data.d(), theta_star.len())?;
    let mut sum = vec![0.0; data.d()];
    for t in 0..data.len() {
        let fit: f64 = data.signal_row(t).iter().zip(theta_star).map(|(x, th)| x * th).sum();
        let gamma = data.benefits()[t] - fit;
        for (s, v) in sum.iter_mut().zip(data.instrument_row(instrument, t)?) {
            *s += gamma * v;
        }
    }
    Ok(sum.iter().map(|s| s * s).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_examples() {
        let data = Dataset::from_rows(&[vec![1.0]], &[vec![2.0]], None, &[6.0]).unwrap();
        assert_abs_diff_eq!(gmm_contract_iv(&data).unwrap().theta_hat[0], 3.0, epsilon = 1e-14);
        let data = Dataset::from_rows(&[vec![1.0]], &[vec![2.0]], Some(&[vec![2.0]]), &[8.0]).unwrap();
        assert_abs_diff_eq!(gmm_repeated_iv(&data).unwrap().theta_hat[0], 4.0, epsilon = 1e-14);
        let data = Dataset::from_rows(&[vec![1.0]], &[vec![2.0]], Some(&[vec![2.0]]), &[4.0]).unwrap();
        assert_abs_diff_eq!(gmm_repeated_iv(&data).unwrap().theta_hat[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn missing_second_signal_and_short_data() {
        let data = Dataset::from_rows(&[vec![1.0]], &[vec![2.0]], None, &[6.0]).unwrap();
        assert!(matches!(gmm_repeated_iv(&data), Err(Error::MissingSecondSignal)));
        let data = Dataset::from_rows(&[vec![1.0, 0.0]], &[vec![2.0, 1.0]], None, &[6.0]).unwrap();
        assert!(matches!(gmm_contract_iv(&data), Err(Error::InsufficientData { rows: 1, dim: 2 })));
    }

    #[test]
    fn singular_cross_moment_is_refused() {
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let data = Dataset::from_rows(&rows, &rows, None, &[1.0, 2.0]).unwrap();
        match gmm_contract_iv(&data) {
            Err(Error::IllConditioned { sigma_min, .. }) => assert!(sigma_min < 1e-9),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn singular_value_examples() {
        assert_abs_diff_eq!(min_singular_value(&DMatrix::identity(3, 3)), 1.0, epsilon = 1e-14);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        assert_abs_diff_eq!(min_singular_value(&m), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(bound_from_log_term(100.0, 1.0, 10.0), 1.0, epsilon = 1e-15);
        let b1 = error_bound_contract_iv(500, 5, 0.1, 3.0).unwrap();
        let b2 = error_bound_contract_iv(500, 5, 0.1, 6.0).unwrap();
        assert_abs_diff_eq!(b1, 2.0 * b2, epsilon = 1e-12);
        assert!(error_bound_contract_iv(500, 5, 0.1, 0.0).is_err());
    }

    #[test]
    fn noiseless_residual_is_zero() {
        let b = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let x = vec![vec![0.5, 0.0], vec![0.0, 0.5], vec![0.5, 0.5]];
        let y: Vec<f64> = x.iter().map(|r| r[0] * 2.0 + r[1] * 4.0).collect();
        let data = Dataset::from_rows(&b, &x, Some(&x), &y).unwrap();
        assert_eq!(residual_deviation_check(&data, &[2.0, 4.0]).unwrap(), 0.0);
        for est in [gmm_contract_iv(&data), gmm_repeated_iv(&data), ols_naive(&data)] {
            let est = est.unwrap();
            assert_abs_diff_eq!(est.theta_hat[0], 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(est.theta_hat[1], 4.0, epsilon = 1e-12);
        }
    }
}
