use contract_iv::environment::{principal_utility, ContractBox};
use contract_iv::model::{
    optimal_contract, optimal_share_single_good, AgentType, Contract, DiagonalPowerCost, SingleGoodModel,
};
use contract_iv::robust::{upper_facets, TabularContract};
use proptest::prelude::*;

fn weights(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..20.0, d)
}

fn cost_strategy() -> impl Strategy<Value = (DiagonalPowerCost, Vec<f64>)> {
    (1usize..6).prop_flat_map(|d| {
        (weights(d), 1.1f64..4.0, prop::collection::vec(0.0f64..3.0, d))
            .prop_map(|(w, p, a)| (DiagonalPowerCost::new(w, p).unwrap(), a))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cost_is_homogeneous((cost, a) in cost_strategy(), rho in 0.05f64..10.0) {
        let scaled: Vec<f64> = a.iter().map(|x| rho * x).collect();
        let lhs = cost.cost(&scaled).unwrap();
        let rhs = rho.powf(cost.degree()) * cost.cost(&a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn euler_identity_holds((cost, a) in cost_strategy()) {
        let grad = cost.gradient(&a).unwrap();
        let lhs: f64 = grad.iter().zip(&a).map(|(g, x)| g * x).sum();
        let rhs = cost.degree() * cost.cost(&a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        prop_assert!(cost.euler_residual(&a).unwrap() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn best_response_meets_first_order_condition(
        (cost, beta) in (1usize..6).prop_flat_map(|d| {
            (weights(d), 1.1f64..4.0, prop::collection::vec(0.01f64..5.0, d))
                .prop_map(|(w, p, b)| (DiagonalPowerCost::new(w, p).unwrap(), b))
        })
    ) {
        let agent = AgentType::new(cost);
        let a = agent.best_response(&Contract::new(beta.clone()).unwrap()).unwrap();
        let grad = agent.cost.gradient(&a).unwrap();
        for (g, b) in grad.iter().zip(&beta) {
            prop_assert!((g - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn best_response_beats_grid_alternatives(
        w in weights(2), p in 1.2f64..3.5, b in prop::collection::vec(0.0f64..3.0, 2)
    ) {
        let agent = AgentType::new(DiagonalPowerCost::new(w, p).unwrap());
        let beta = Contract::new(b).unwrap();
        let a = agent.best_response(&beta).unwrap();
        let u = agent.utility(&beta, &a).unwrap();
        for i in 0..=30 {
            for j in 0..=30 {
                let alt = [i as f64 * 0.1, j as f64 * 0.1];
                prop_assert!(u >= agent.utility(&beta, &alt).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn optimal_contract_is_agent_independent(
        w1 in weights(2), w2 in weights(2), theta in prop::collection::vec(0.2f64..3.0, 2)
    ) {
        // Same degree, different weights: the principal's optimum is θ/2 for both.
        let beta = optimal_contract(&theta, 2.0).unwrap();
        for w in [w1, w2] {
            let agent = AgentType::new(DiagonalPowerCost::new(w, 2.0).unwrap());
            let u = |b: &Contract| principal_utility(&theta, b, &agent.best_response(b).unwrap());
            let best = u(&beta);
            for k in 0..2 {
                for delta in [-0.01, 0.01] {
                    let mut alt = beta.as_slice().to_vec();
                    alt[k] = (alt[k] + delta).max(0.0);
                    prop_assert!(best >= u(&Contract::new(alt).unwrap()));
                }
            }
        }
    }

    #[test]
    fn single_good_share_ignores_scales(
        k1 in 0.3f64..0.9, k2 in 1.2f64..3.0, a in 0.1f64..10.0, b in 0.1f64..10.0
    ) {
        let grid_argmax = |m: &SingleGoodModel| {
            (0..1000).map(|i| i as f64 * 0.001).max_by(|x, y| m.principal_utility(*x).total_cmp(&m.principal_utility(*y))).unwrap()
        };
        let base = SingleGoodModel::new(k1, k2, 1.0, 1.0).unwrap();
        let scaled = SingleGoodModel::new(k1, k2, a, b).unwrap();
        prop_assert!((grid_argmax(&base) - grid_argmax(&scaled)).abs() <= 0.001 + 1e-12);
        prop_assert!((grid_argmax(&scaled) - optimal_share_single_good(&scaled)).abs() <= 0.001);
    }

    #[test]
    fn facets_dominate_the_table(payments in prop::collection::vec(0.0f64..5.0, 8)) {
        let w = TabularContract::new(3, payments).unwrap();
        let facets = upper_facets(&w);
        for f in &facets {
            for (m, x) in (0..8).map(|m| (m, (0..3).map(|i| ((m >> i) & 1) as f64).collect::<Vec<_>>())) {
                prop_assert!(f.value(&x) >= w.payment(m) - 1e-9);
            }
        }
    }

    #[test]
    fn clamp_lands_in_box(b in prop::collection::vec(-20.0f64..20.0, 3)) {
        let bx = ContractBox::new(vec![0.0, 1.0, 0.5], vec![5.0, 2.0, 2.0]).unwrap();
        prop_assert!(bx.contains(&bx.clamp(&b)));
    }
}
