//! Agent costs, best responses and optimal-contract characterizations.
//!
//! Costs come from the separable homogeneous family
//! `c(a) = Σ_i (w_i / p) a_i^p` with `p > 1`, whose gradient has components
//! `w_i a_i^{p-1}`. Both diagonal quadratic costs used in practice fit:
//! `½ aᵀ diag(κ)⁻¹ a` is `w = 1/κ, p = 2` and `Σ κ_i a_i²` is `w = 2κ, p = 2`.

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPowerCost {
    weights: Vec<f64>,
    degree: f64,
}

impl DiagonalPowerCost {
    pub fn new(weights: Vec<f64>, degree: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("cost needs at least one task".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("cost weight {w} is not strictly positive")));
        }
        if !(degree.is_finite() && degree > 1.0) {
            return Err(Error::InvalidParameter(format!("homogeneity degree {degree} must exceed 1")));
        }
        Ok(Self { weights, degree })
    }

    /// `Σ κ_i a_i²`.
    pub fn sum_of_squares(kappa: &[f64]) -> Result<Self> {
        Self::new(kappa.iter().map(|k| 2.0 * k).collect(), 2.0)
    }

    /// `½ aᵀ diag(κ)⁻¹ a`, whose best response is `κ ⊙ β`.
    pub fn inverse_diagonal_quadratic(kappa: &[f64]) -> Result<Self> {
        Self::new(kappa.iter().map(|k| 1.0 / k).collect(), 2.0)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn cost(&self, action: &[f64]) -> Result<f64> {
        check_dim(self.dim(), action.len())?;
        check_nonnegative(action)?;
        Ok(self.cost_unchecked(action))
    }

    pub(crate) fn cost_unchecked(&self, action: &[f64]) -> f64 {
        let p = self.degree;
        self.weights.iter().zip(action).map(|(w, a)| w / p * a.powf(p)).sum()
    }

    pub fn gradient(&self, action: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), action.len())?;
        check_nonnegative(action)?;
        Ok(self.weights.iter().zip(action).map(|(w, a)| w * a.powf(self.degree - 1.0)).collect())
    }

    /// `⟨∇c(a), a⟩ − p·c(a)`, identically zero for a degree-`p` homogeneous cost.
    pub fn euler_residual(&self, action: &[f64]) -> Result<f64> {
        let grad = self.gradient(action)?;
        let inner: f64 = grad.iter().zip(action).map(|(g, a)| g * a).sum();
        Ok(inner - self.degree * self.cost_unchecked(action))
    }

    /// Maximizer of `⟨slope, a⟩ − c(a)` over `a ≥ 0`. Non-positive slope
    /// components give zero effort on that task.
    pub(crate) fn argmax_linear(&self, slope: &[f64]) -> Vec<f64> {
        let inv = 1.0 / (self.degree - 1.0);
        self.weights.iter().zip(slope).map(|(w, s)| if *s > 0.0 { (s / w).powf(inv) } else { 0.0 }).collect()
    }
}

fn check_nonnegative(action: &[f64]) -> Result<()> {
    match action.iter().position(|a| !(a.is_finite() && *a >= 0.0)) {
        Some(i) => Err(Error::InvalidParameter(format!(
            "action component {i} = {} is not a finite nonnegative number",
            action[i]
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentType {
    pub cost: DiagonalPowerCost,
}

impl AgentType {
    pub fn new(cost: DiagonalPowerCost) -> Self {
        Self { cost }
    }

    pub fn dim(&self) -> usize {
        self.cost.dim()
    }

    pub fn degree(&self) -> f64 {
        self.cost.degree()
    }

    /// Hidden action `a(β) = argmax_a ⟨β, a⟩ − c(a)`, componentwise
    /// `(β_i / w_i)^{1/(p−1)}`.
    pub fn best_response(&self, contract: &Contract) -> Result<Vec<f64>> {
        check_dim(self.dim(), contract.dim())?;
        Ok(self.cost.argmax_linear(contract.as_slice()))
    }

    /// Expected agent utility `⟨β, a⟩ − c(a)`.
    pub fn utility(&self, contract: &Contract, action: &[f64]) -> Result<f64> {
        check_dim(self.dim(), contract.dim())?;
        let pay: f64 = contract.as_slice().iter().zip(action).map(|(b, a)| b * a).sum();
        Ok(pay - self.cost.cost(action)?)
    }
}

/// Linear contract: per-task piece rates, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    beta: Vec<f64>,
}

impl Contract {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidParameter("contract needs at least one task".into()));
        }
        if let Some(i) = beta.iter().position(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "contract component {i} = {} must be finite and nonnegative",
                beta[i]
            )));
        }
        Ok(Self { beta })
    }

    pub fn zeros(d: usize) -> Self {
        Self { beta: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.beta
    }

    pub fn expected_payment(&self, action: &[f64]) -> f64 {
        self.beta.iter().zip(action).map(|(b, a)| b * a).sum()
    }

    pub fn squared_distance(&self, other: &Contract) -> f64 {
        self.beta.iter().zip(&other.beta).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

/// Optimal linear contract `β* = θ / p` for any agent whose cost is
/// homogeneous of degree `p`; the cost weights play no role.
pub fn optimal_contract(theta: &[f64], degree: f64) -> Result<Contract> {
    if !(degree.is_finite() && degree > 1.0) {
        return Err(Error::InvalidParameter(format!("optimal contract requires homogeneity degree > 1, got {degree}")));
    }
    Contract::new(theta.iter().map(|t| t / degree).collect())
}

/// Single-good model with production `f(a) = A·a^{k1}` and cost
/// `c(a) = B·a^{k2}`; the principal keeps `(1 − β) f(a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleGoodModel {
    k1: f64,
    k2: f64,
    production_scale: f64,
    cost_scale: f64,
}

impl SingleGoodModel {
    pub fn new(k1: f64, k2: f64, production_scale: f64, cost_scale: f64) -> Result<Self> {
        if !(k1 > 0.0 && k1 <= 1.0) {
            return Err(Error::InvalidParameter(format!("production degree {k1} must lie in (0, 1]")));
        }
        if !(k2 > 1.0 && k2.is_finite()) {
            return Err(Error::InvalidParameter(format!("cost degree {k2} must exceed 1")));
        }
        if !(production_scale > 0.0 && cost_scale > 0.0) {
            return Err(Error::InvalidParameter("scales must be positive".into()));
        }
        Ok(Self { k1, k2, production_scale, cost_scale })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn production(&self, effort: f64) -> f64 {
        self.production_scale * effort.powf(self.k1)
    }

    pub fn cost(&self, effort: f64) -> f64 {
        self.cost_scale * effort.powf(self.k2)
    }

    /// Effort solving `β f'(a) = c'(a)`.
    pub fn induced_effort(&self, share: f64) -> f64 {
        if share <= 0.0 {
            return 0.0;
        }
        let ratio = share * self.production_scale * self.k1 / (self.cost_scale * self.k2);
        ratio.powf(1.0 / (self.k2 - self.k1))
    }

    pub fn principal_utility(&self, share: f64) -> f64 {
        (1.0 - share) * self.production(self.induced_effort(share))
    }
}

/// Optimal revenue share `k1 / k2`, independent of both scales.
pub fn optimal_share_single_good(model: &SingleGoodModel) -> f64 {
    model.k1 / model.k2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cost_examples() {
        let c = DiagonalPowerCost::new(vec![2.0, 2.0], 2.0).unwrap();
        assert_eq!(c.cost(&[0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(c.cost(&[1.0, 3.0]).unwrap(), 10.0, epsilon = 1e-12);
        let cubic = DiagonalPowerCost::new(vec![1.0, 1.0], 3.0).unwrap();
        assert_abs_diff_eq!(cubic.cost(&[2.0, 2.0]).unwrap(), 16.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn cost_rejects_bad_input() {
        let c = DiagonalPowerCost::new(vec![1.0, 1.0], 2.0).unwrap();
        assert!(matches!(c.cost(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(c.cost(&[-1.0, 0.0]).is_err());
        assert!(DiagonalPowerCost::new(vec![1.0, 0.0], 2.0).is_err());
        assert!(DiagonalPowerCost::new(vec![1.0], 1.0).is_err());
    }

    #[test]
    fn euler_examples() {
        let c = DiagonalPowerCost::new(vec![2.0, 2.0], 2.0).unwrap();
        assert_abs_diff_eq!(c.euler_residual(&[1.0, 3.0]).unwrap(), 0.0, epsilon = 1e-12);
        let c = DiagonalPowerCost::new(vec![1.0, 5.0], 3.0).unwrap();
        assert_abs_diff_eq!(c.euler_residual(&[0.7, 1.2]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn best_response_inverse_quadratic() {
        let agent = AgentType::new(DiagonalPowerCost::inverse_diagonal_quadratic(&[2.0, 3.0]).unwrap());
        let a = agent.best_response(&Contract::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(a[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1], 3.0, epsilon = 1e-12);
        assert_eq!(agent.best_response(&Contract::zeros(2)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn best_response_matches_one_dimensional_grid() {
        let agent = AgentType::new(DiagonalPowerCost::new(vec![2.0], 2.0).unwrap());
        let beta = Contract::new(vec![1.0]).unwrap();
        let a = agent.best_response(&beta).unwrap();
        assert_abs_diff_eq!(a[0], 0.5, epsilon = 1e-12);
        let (best, _) = (0..=2000)
            .map(|k| k as f64 * 0.001)
            .map(|x| (x, agent.utility(&beta, &[x]).unwrap()))
            .fold((0.0, f64::NEG_INFINITY), |acc, (x, u)| if u > acc.1 { (x, u) } else { acc });
        assert_abs_diff_eq!(best, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn optimal_contract_examples() {
        let b = optimal_contract(&[1.0, 2.0, 3.0, 4.0, 5.0], 2.0).unwrap();
        assert_eq!(b.as_slice(), &[0.5, 1.0, 1.5, 2.0, 2.5]);
        assert_eq!(optimal_contract(&[0.0, 0.0], 3.0).unwrap().as_slice(), &[0.0, 0.0]);
        assert!(optimal_contract(&[1.0], 1.0).is_err());
    }

    #[test]
    fn single_good_share() {
        let m = SingleGoodModel::new(1.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(optimal_share_single_good(&m), 0.5);
        let m = SingleGoodModel::new(0.5, 2.0, 3.0, 0.2).unwrap();
        assert_eq!(optimal_share_single_good(&m), 0.25);
        assert!(SingleGoodModel::new(1.2, 2.0, 1.0, 1.0).is_err());
        assert!(SingleGoodModel::new(0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn induced_effort_satisfies_first_order_condition() {
        let m = SingleGoodModel::new(0.7, 2.5, 2.0, 0.5).unwrap();
        let beta = 0.3;
        let a = m.induced_effort(beta);
        let marginal_pay = beta * 2.0 * 0.7 * a.powf(-0.3);
        let marginal_cost = 0.5 * 2.5 * a.powf(1.5);
        assert_abs_diff_eq!(marginal_pay, marginal_cost, epsilon = 1e-10);
    }
}
