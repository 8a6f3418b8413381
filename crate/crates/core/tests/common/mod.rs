//! Independent oracles shared by the integration tests. Nothing here calls
//! into the routine it is used to check.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cube vertex with bit `i` of `mask` as coordinate `i`.
pub fn corner(d: usize, mask: usize) -> Vec<f64> {
    (0..d).map(|i| ((mask >> i) & 1) as f64).collect()
}

/// A supporting affine function `z = s·x + c` with the vertices it touches.
#[derive(Debug, Clone)]
pub struct BruteFacet {
    pub slope: Vec<f64>,
    pub intercept: f64,
    pub contact: Vec<usize>,
}

/// Upper facets of the lifted vertex table by trying every `(d+1)`-subset
/// of vertices, solving for the affine function through it and keeping it
/// when it dominates every vertex. Facets are deduplicated by contact set.
pub fn brute_upper_facets(d: usize, payments: &[f64]) -> Vec<BruteFacet> {
    let n = 1usize << d;
    let mut out: Vec<BruteFacet> = Vec::new();
    let mut subset: Vec<usize> = (0..=d).collect();
    loop {
        let mut m = DMatrix::zeros(d + 1, d + 1);
        let mut rhs = DVector::zeros(d + 1);
        for (r, &v) in subset.iter().enumerate() {
            for (c, x) in corner(d, v).into_iter().enumerate() {
                m[(r, c)] = x;
            }
            m[(r, d)] = 1.0;
            rhs[r] = payments[v];
        }
        if m.determinant().abs() > 1e-9 {
            let sol = m.lu().solve(&rhs).expect("nonsingular");
            let f = |v: usize| corner(d, v).iter().zip(sol.iter()).map(|(x, s)| x * s).sum::<f64>() + sol[d];
            if (0..n).all(|v| f(v) >= payments[v] - 1e-9) {
                let contact: Vec<usize> = (0..n).filter(|&v| (f(v) - payments[v]).abs() <= 1e-9).collect();
                if !out.iter().any(|b| b.contact == contact) {
                    out.push(BruteFacet {
                        slope: sol.rows(0, d).iter().copied().collect(),
                        intercept: sol[d],
                        contact,
                    });
                }
            }
        }
        // Next combination in lexicographic order.
        let mut i = d + 1;
        loop {
            if i == 0 {
                out.sort_by(|a, b| a.contact.cmp(&b.contact));
                return out;
            }
            i -= 1;
            if subset[i] < n - (d + 1 - i) {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..=d {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Euclidean distance from `x` to the convex hull of `points`, by checking
/// every subset: the nearest point is the projection onto the affine span
/// of some subset with strictly positive barycentric weights.
pub fn brute_hull_distance(points: &[Vec<f64>], x: &[f64]) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for mask in 1usize..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| (mask >> i) & 1 == 1).collect();
        let p0 = &points[idx[0]];
        let k = idx.len() - 1;
        let (lambda, proj) = if k == 0 {
            (vec![1.0], p0.clone())
        } else {
            let a = DMatrix::from_fn(x.len(), k, |r, c| points[idx[c + 1]][r] - p0[r]);
            let b = DVector::from_fn(x.len(), |r, _| x[r] - p0[r]);
            let gram = a.transpose() * &a;
            let Some(chol) = gram.clone().cholesky() else { continue };
            if gram.determinant().abs() < 1e-12 {
                continue;
            }
            let mu = chol.solve(&(a.transpose() * &b));
            let mut lambda = vec![1.0 - mu.sum()];
            lambda.extend(mu.iter().copied());
            let proj: Vec<f64> = (0..x.len()).map(|r| p0[r] + (&a * &mu)[r]).collect();
            (lambda, proj)
        };
        if lambda.iter().all(|&l| l >= -1e-12) {
            let dist = proj.iter().zip(x).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            best = best.min(dist);
        }
    }
    best
}

/// Freudenthal (Kuhn) interpolation: the compatible family that splits the
/// cube into the `d!` simplices `x_π(1) ≥ … ≥ x_π(d)`.
pub fn kuhn_law(d: usize, x: &[f64]) -> Vec<(usize, f64)> {
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut law = vec![(0usize, 1.0 - x[order[0]])];
    let mut mask = 0usize;
    for k in 0..d {
        mask |= 1 << order[k];
        let next = if k + 1 < d { x[order[k + 1]] } else { 0.0 };
        law.push((mask, x[order[k]] - next));
    }
    law
}

/// The other triangulation of the square, split along the `10–01` diagonal.
pub fn anti_diagonal_law(x: &[f64]) -> Vec<(usize, f64)> {
    let (a, b) = (x[0], x[1]);
    if a + b <= 1.0 {
        vec![(0, 1.0 - a - b), (1, a), (2, b)]
    } else {
        vec![(3, a + b - 1.0), (1, 1.0 - b), (2, 1.0 - a)]
    }
}

/// Principal payoff when every action in `menu` is mapped to an outcome law
/// by `law`, the agent best-responds over the menu, and ties go against
/// the principal. Cost is `Σ (w_i/p) a_i^p`.
pub fn family_payoff<F: Fn(&[f64]) -> Vec<(usize, f64)>>(
    payments: &[f64],
    weights: &[f64],
    p: f64,
    theta: &[f64],
    menu: &[Vec<f64>],
    law: F,
) -> f64 {
    let scored: Vec<(f64, f64)> = menu
        .iter()
        .map(|a| {
            let pay: f64 = law(a).iter().map(|&(m, q)| q * payments[m]).sum();
            let cost: f64 = a.iter().zip(weights).map(|(x, w)| w / p * x.powf(p)).sum();
            let benefit: f64 = a.iter().zip(theta).map(|(x, t)| x * t).sum();
            (pay - cost, benefit - pay)
        })
        .collect();
    let top = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    scored.iter().filter(|s| s.0 >= top - 1e-12).map(|s| s.1).fold(f64::INFINITY, f64::min)
}

/// Regular grid on `[0, 1]^d` with `1/res` steps per axis.
pub fn unit_grid(d: usize, res: f64) -> Vec<Vec<f64>> {
    let n = (1.0 / res).round() as usize;
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        out.push(idx.iter().map(|&i| i as f64 / n as f64).collect());
        let Some(k) = idx.iter().position(|&i| i < n) else { return out };
        idx[k] += 1;
        idx[..k].iter_mut().for_each(|i| *i = 0);
    }
}

/// Argmax cell of `θ·a(β) − β·a(β)` on the half-open grid `[0, 2·max θ)^2`
/// with `a_i = β_i / w_i` (quadratic cost `Σ (w_i/2) a_i²`).
pub fn quadratic_grid_argmax(weights: &[f64; 2], theta: &[f64; 2], step: f64) -> (usize, usize) {
    let n = (2.0 * theta[0].max(theta[1]) / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for i in 0..n {
        for j in 0..n {
            let beta = [i as f64 * step, j as f64 * step];
            let u: f64 = (0..2).map(|k| (theta[k] - beta[k]) * beta[k] / weights[k]).sum();
            if u > best.0 {
                best = (u, (i, j));
            }
        }
    }
    best.1
}

/// Monte-Carlo attenuation factor `E[a x] / E[x²]` for `x = a + ε`,
/// `a ≡ 1`, `ε ~ N(0, σ²)`.
pub fn attenuation_factor(sigma: f64, n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let (mut ax, mut xx) = (0.0, 0.0);
    for _ in 0..n {
        let eps: f64 = StandardNormal.sample(&mut r);
        let x = 1.0 + sigma * eps;
        ax += x;
        xx += x * x;
    }
    ax / xx
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

use contract_iv::environment::{Arena, Observation};
use contract_iv::model::Contract;

/// Serves recorded observations in order. It holds no configuration and no
/// agents, so a policy driven by it can only see what was observed.
pub struct ReplayArena {
    pub dim: usize,
    pub log: Vec<Observation>,
    pub next: usize,
}

impl ReplayArena {
    pub fn new(dim: usize, log: Vec<Observation>) -> Self {
        Self { dim, log, next: 0 }
    }
}

impl Arena for ReplayArena {
    fn dim(&self) -> usize {
        self.dim
    }

    fn post(&mut self, contract: &Contract) -> contract_iv::Result<Observation> {
        let o = self.log[self.next].clone();
        assert_eq!(&o.contract, contract, "policy deviated from the recorded run at round {}", self.next);
        self.next += 1;
        Ok(o)
    }
}
