//! Worst-case principal payoff of a tabular contract over compatible signal
//! families.
//!
//! A family picks, for every action `a`, a law on `{0,1}^d` with mean `a`.
//! Over such laws the expected payment `E[w]` ranges exactly over
//! `[w̌(a), ŵ(a)]`, the convex and concave envelopes of `w`, and the choice can
//! be made independently per action. The adversary therefore pays `ŵ(a*)` on
//! the action it wants induced and `w̌` elsewhere: `a*` is inducible when
//! `ŵ(a*) − c(a*) ≥ max_a (w̌(a) − c(a))`, and the worst case is the minimum
//! of `⟨θ, a*⟩ − ŵ(a*)` over inducible `a*`. Actions range over a finite menu
//! (a grid plus optional anchor points), which keeps the oracle a brute force
//! over vertex-supported families.

use nalgebra::{DMatrix, DVector};

use super::hull::{concave_envelope, upper_facets, upper_facets_of_values};
use super::tabular::{vertex, TabularContract};
use crate::error::{check_dim, Error, Result};
use crate::model::AgentType;

/// Coarsest admissible grid step is 1; finer than this is refused.
pub const MIN_RESOLUTION: f64 = 0.05;

pub const WORST_CASE_MAX_DIM: usize = 3;

/// Ties in the agent's choice are resolved within this slack.
const TIE_TOL: f64 = 1e-12;

/// Grid `{0, h, 2h, …, 1}^d` with `h = 1/round(1/resolution)`.
pub fn action_grid(d: usize, resolution: f64) -> Result<Vec<Vec<f64>>> {
    if !(resolution.is_finite() && resolution >= MIN_RESOLUTION - 1e-12) {
        return Err(Error::ResolutionTooFine(resolution));
    }
    if resolution > 1.0 {
        return Err(Error::InvalidParameter(format!("grid resolution {resolution} exceeds 1")));
    }
    let steps = (1.0 / resolution).round() as usize;
    let per_axis = steps + 1;
    let total = per_axis.pow(d as u32);
    Ok((0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    k as f64 / steps as f64
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffRange {
    /// Principal payoff under the least favorable compatible family.
    pub worst: f64,
    /// Principal payoff under the most favorable compatible family.
    pub best: f64,
    pub worst_action: Vec<f64>,
    pub best_action: Vec<f64>,
    pub menu_size: usize,
}

struct Envelopes {
    upper: Vec<f64>,
    lower: Vec<f64>,
}

fn envelopes(w: &TabularContract, menu: &[Vec<f64>]) -> Envelopes {
    let upper_facets_w = upper_facets(w);
    let negated: Vec<f64> = w.payments().iter().map(|p| -p).collect();
    let lower_facets = upper_facets_of_values(w.dim(), &negated);
    Envelopes {
        upper: menu.iter().map(|a| concave_envelope(&upper_facets_w, a)).collect(),
        lower: menu.iter().map(|a| -concave_envelope(&lower_facets, a)).collect(),
    }
}

fn validate(w: &TabularContract, agent: &AgentType, theta: &[f64]) -> Result<()> {
    let d = w.dim();
    check_dim(d, agent.dim())?;
    check_dim(d, theta.len())?;
    if d > WORST_CASE_MAX_DIM {
        return Err(Error::InvalidParameter(format!("worst-case oracle supports d <= {WORST_CASE_MAX_DIM}, got {d}")));
    }
    Ok(())
}

/// Worst and best principal payoff of `w` over compatible families, with the
/// agent choosing from the grid plus `anchors`.
pub fn payoff_range(
    w: &TabularContract,
    agent: &AgentType,
    theta: &[f64],
    grid_resolution: f64,
    anchors: &[Vec<f64>],
) -> Result<PayoffRange> {
    validate(w, agent, theta)?;
    let d = w.dim();
    let mut menu = action_grid(d, grid_resolution)?;
    for a in anchors {
        check_dim(d, a.len())?;
        if a.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter(format!("anchor action {a:?} lies outside the unit cube")));
        }
        menu.push(a.clone());
    }
    let env = envelopes(w, &menu);
    let costs: Vec<f64> = menu.iter().map(|a| agent.cost.cost_unchecked(a)).collect();
    let benefit: Vec<f64> = menu.iter().map(|a| a.iter().zip(theta).map(|(x, t)| x * t).sum()).collect();

    let outside: Vec<f64> = env.lower.iter().zip(&costs).map(|(l, c)| l - c).collect();
    let (mut top, mut top_idx, mut second) = (f64::NEG_INFINITY, usize::MAX, f64::NEG_INFINITY);
    for (i, v) in outside.iter().enumerate() {
        if *v > top {
            second = top;
            top = *v;
            top_idx = i;
        } else if *v > second {
            second = *v;
        }
    }

    let mut worst = (f64::INFINITY, 0usize);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for i in 0..menu.len() {
        if env.upper[i] - costs[i] >= top - TIE_TOL {
            let payoff = benefit[i] - env.upper[i];
            if payoff < worst.0 {
                worst = (payoff, i);
            }
        }
        let rival = if i == top_idx { second } else { top };
        let pay = env.lower[i].max(rival + costs[i]);
        if pay <= env.upper[i] + TIE_TOL {
            let payoff = benefit[i] - pay.min(env.upper[i]);
            if payoff > best.0 {
                best = (payoff, i);
            }
        }
    }
    Ok(PayoffRange {
        worst: worst.0,
        best: best.0,
        worst_action: menu[worst.1].clone(),
        best_action: menu[best.1].clone(),
        menu_size: menu.len(),
    })
}

/// Worst-case principal payoff of `w` on the action grid. See
/// [`payoff_range`] for anchor actions.
pub fn worst_case_payoff(w: &TabularContract, agent: &AgentType, theta: &[f64], grid_resolution: f64) -> Result<f64> {
    Ok(payoff_range(w, agent, theta, grid_resolution, &[])?.worst)
}

/// One explicit compatible family on a finite action set: for each action a
/// law on cube vertices, given as `(vertex mask, probability)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibleFamily {
    d: usize,
    actions: Vec<Vec<f64>>,
    laws: Vec<Vec<(usize, f64)>>,
}

impl CompatibleFamily {
    pub fn new(d: usize, actions: Vec<Vec<f64>>, laws: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        check_dim(actions.len(), laws.len())?;
        for (a, law) in actions.iter().zip(&laws) {
            check_dim(d, a.len())?;
            let total: f64 = law.iter().map(|(_, p)| p).sum();
            if law.iter().any(|(m, p)| *m >= 1 << d || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("law for action {a:?} is not a distribution on vertices")));
            }
            let mut mean = vec![0.0; d];
            for (m, p) in law {
                mean.iter_mut().zip(vertex(d, *m)).for_each(|(s, x)| *s += p * x);
            }
            if mean.iter().zip(a).any(|(m, x)| (m - x).abs() > 1e-9) {
                return Err(Error::InvalidParameter(format!("law for action {a:?} has mean {mean:?}")));
            }
        }
        Ok(Self { d, actions, laws })
    }

    /// For each action, the law given by its barycentric coordinates in the
    /// first listed simplex (vertex masks, `d+1` each) that contains it.
    pub fn from_simplices(d: usize, actions: Vec<Vec<f64>>, simplices: &[Vec<usize>]) -> Result<Self> {
        let mut laws = Vec::with_capacity(actions.len());
        for a in &actions {
            let law = simplices
                .iter()
                .find_map(|s| barycentric(d, s, a))
                .ok_or_else(|| Error::InvalidParameter(format!("no simplex contains {a:?}")))?;
            laws.push(law);
        }
        Self::new(d, actions, laws)
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn expected_payment(&self, w: &TabularContract, i: usize) -> f64 {
        self.laws[i].iter().map(|(m, p)| p * w.payment(*m)).sum()
    }

    /// Principal payoff when the agent best responds among the family's
    /// actions; ties go against the principal.
    pub fn principal_payoff(&self, w: &TabularContract, agent: &AgentType, theta: &[f64]) -> Result<f64> {
        check_dim(self.d, w.dim())?;
        check_dim(self.d, theta.len())?;
        let utility: Vec<f64> = (0..self.actions.len())
            .map(|i| self.expected_payment(w, i) - agent.cost.cost_unchecked(&self.actions[i]))
            .collect();
        let top = utility.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((0..self.actions.len())
            .filter(|&i| utility[i] >= top - TIE_TOL)
            .map(|i| self.actions[i].iter().zip(theta).map(|(x, t)| x * t).sum::<f64>() - self.expected_payment(w, i))
            .fold(f64::INFINITY, f64::min))
    }
}

fn barycentric(d: usize, simplex: &[usize], a: &[f64]) -> Option<Vec<(usize, f64)>> {
    if simplex.len() != d + 1 {
        return None;
    }
    let m = DMatrix::from_fn(d + 1, d + 1, |r, c| if r < d { vertex(d, simplex[c])[r] } else { 1.0 });
    let rhs = DVector::from_fn(d + 1, |r, _| if r < d { a[r] } else { 1.0 });
    let lambda = m.lu().solve(&rhs)?;
    if lambda.iter().any(|l| *l < -1e-12) {
        return None;
    }
    Some(simplex.iter().zip(lambda.iter()).map(|(&v, &l)| (v, l.max(0.0))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiagonalPowerCost;
    use approx::assert_abs_diff_eq;

    fn quadratic(weights: &[f64]) -> AgentType {
        AgentType::new(DiagonalPowerCost::new(weights.to_vec(), 2.0).unwrap())
    }

    #[test]
    fn grid_guard() {
        assert!(matches!(action_grid(2, 0.01), Err(Error::ResolutionTooFine(_))));
        assert_eq!(action_grid(2, 0.5).unwrap().len(), 9);
        assert_eq!(action_grid(3, 0.05).unwrap().len(), 21 * 21 * 21);
    }

    #[test]
    fn zero_contract_pays_nothing() {
        let w = TabularContract::zeros(2).unwrap();
        let r = payoff_range(&w, &quadratic(&[1.0, 2.0]), &[1.0, 2.0], 0.05, &[]).unwrap();
        assert_eq!(r.worst, 0.0);
        assert_eq!(r.best, 0.0);
        assert_eq!(r.worst_action, vec![0.0, 0.0]);
    }

    #[test]
    fn affine_contract_is_family_independent() {
        let w = TabularContract::affine(&[0.5, 1.0], 0.2).unwrap();
        let r = payoff_range(&w, &quadratic(&[1.0, 2.0]), &[1.0, 2.0], 0.05, &[]).unwrap();
        assert_abs_diff_eq!(r.worst, r.best, epsilon = 1e-9);
        // Induced action (0.5, 0.5) is on the grid.
        assert_abs_diff_eq!(r.worst, 1.5 - (0.25 + 0.5 + 0.2), epsilon = 1e-9);
    }

    #[test]
    fn family_from_simplices() {
        let actions = vec![vec![0.25, 0.5], vec![1.0, 1.0]];
        let fam = CompatibleFamily::from_simplices(2, actions, &[vec![0, 1, 3], vec![0, 2, 3]]).unwrap();
        let w = TabularContract::new(2, vec![0.0, 2.0, 2.0, 3.0]).unwrap();
        // (0.25, 0.5) = 0.5·(0,0) + 0.25·(0,1) + 0.25·(1,1)
        assert_abs_diff_eq!(fam.expected_payment(&w, 0), 0.5 + 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(fam.expected_payment(&w, 1), 3.0, epsilon = 1e-12);
        assert!(CompatibleFamily::new(1, vec![vec![0.5]], vec![vec![(1, 1.0)]]).is_err());
    }
}
