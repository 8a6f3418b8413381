//! Self-owned supporting hyperplanes and the affine-to-linear refinement.
//!
//! The agent's expected payment under an affine contract is
//! `⟨slope, a⟩ + intercept` whatever the signal law, so the induced action
//! depends on the slope only. A supporting hyperplane is self-owned when that
//! action lies in the convex hull of its own contact set.

use super::hull::{contact_if_supporting, hull_distance, upper_facets, AffineContractFacet, CubeGeometry};
use super::tabular::TabularContract;
use crate::error::{check_dim, Error, Result};
use crate::model::{AgentType, Contract};

/// Certificate tolerance on the distance from the induced action to the
/// contact hull.
pub const SELF_OWNED_TOL: f64 = 1e-8;

/// Largest dimension handled by [`find_self_owned`].
pub const SELF_OWNED_MAX_DIM: usize = 3;

/// `argmax_{a ∈ [0,1]^d} ⟨slope, a⟩ − c(a)`. The cost is separable and convex
/// in each task, so clamping the unconstrained maximizer is exact.
pub fn affine_best_response(agent: &AgentType, slope: &[f64]) -> Result<Vec<f64>> {
    check_dim(agent.dim(), slope.len())?;
    Ok(agent.cost.argmax_linear(slope).into_iter().map(|a| a.min(1.0)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum HyperplaneSource {
    /// A facet of the upper hull, by index in the facet list.
    Facet(usize),
    /// A convex combination of facets sharing a common face.
    Interpolation { facets: Vec<usize>, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfOwnedHyperplane {
    /// The hyperplane as an affine contract with its exact contact set.
    pub hyperplane: AffineContractFacet,
    pub action: Vec<f64>,
    /// Distance from `action` to the contact hull.
    pub distance: f64,
    pub source: HyperplaneSource,
    /// Some task's effort sits at the upper bound 1.
    pub at_boundary: bool,
}

fn contact_hull_distance(facet: &AffineContractFacet, action: &[f64]) -> f64 {
    hull_distance(&facet.contact_points(), action)
}

fn combine(facets: &[AffineContractFacet], members: &[usize], weights: &[f64]) -> (Vec<f64>, f64) {
    let d = facets[members[0]].dim();
    let mut slope = vec![0.0; d];
    let mut intercept = 0.0;
    for (&j, &l) in members.iter().zip(weights) {
        slope.iter_mut().zip(&facets[j].slope).for_each(|(s, fs)| *s += l * fs);
        intercept += l * facets[j].intercept;
    }
    (slope, intercept)
}

struct Search<'a> {
    w: &'a TabularContract,
    agent: &'a AgentType,
    facets: Vec<AffineContractFacet>,
    tol: f64,
    trace: Vec<String>,
}

impl Search<'_> {
    fn hyperplane(&self, slope: Vec<f64>, intercept: f64) -> Option<AffineContractFacet> {
        let contact = contact_if_supporting(self.w.dim(), self.w.payments(), &slope, intercept, self.tol)?;
        Some(AffineContractFacet::new(slope, intercept, contact))
    }

    fn certify(&self, members: &[usize], weights: &[f64]) -> Result<Option<SelfOwnedHyperplane>> {
        let (slope, intercept) = combine(&self.facets, members, weights);
        let Some(hyperplane) = self.hyperplane(slope, intercept) else { return Ok(None) };
        let action = affine_best_response(self.agent, &hyperplane.slope)?;
        let distance = contact_hull_distance(&hyperplane, &action);
        if distance > SELF_OWNED_TOL {
            return Ok(None);
        }
        let source = if members.len() == 1 {
            HyperplaneSource::Facet(members[0])
        } else {
            HyperplaneSource::Interpolation { facets: members.to_vec(), weights: weights.to_vec() }
        };
        let at_boundary = action.iter().any(|a| *a >= 1.0);
        Ok(Some(SelfOwnedHyperplane { hyperplane, action, distance, source, at_boundary }))
    }

    /// Follows the map "facet → facet owning its induced action" until a
    /// fixed point or a repeat. Returns the visited sequence.
    fn walk(&mut self) -> Result<(Option<SelfOwnedHyperplane>, Vec<usize>)> {
        let mut visited = vec![0usize];
        loop {
            let current = *visited.last().expect("nonempty");
            if let Some(found) = self.certify(&[current], &[1.0])? {
                return Ok((Some(found), visited));
            }
            let action = affine_best_response(self.agent, &self.facets[current].slope)?;
            let owner = self
                .facets
                .iter()
                .position(|f| contact_hull_distance(f, &action) <= SELF_OWNED_TOL)
                .expect("contact hulls cover the cube");
            self.trace.push(format!("facet {current} induces {action:?}, owned by facet {owner}"));
            let repeat = visited.contains(&owner);
            visited.push(owner);
            if repeat {
                return Ok((None, visited));
            }
        }
    }

    /// Bisection on `t` for `(1−t)·φ_i + t·φ_j` where the induced action
    /// crosses the shared ridge.
    fn bisect(&mut self, i: usize, j: usize) -> Result<Option<SelfOwnedHyperplane>> {
        let shared: Vec<usize> =
            self.facets[i].contact_set.iter().copied().filter(|m| self.facets[j].contact_set.contains(m)).collect();
        let d = self.w.dim();
        let mut geo = CubeGeometry::new(d);
        let Some(cell) = geo.halfspaces(&self.facets[i].contact_set) else { return Ok(None) };
        let shared_pts: Vec<Vec<f64>> = shared.iter().map(|&m| super::tabular::vertex(d, m)).collect();
        let Some((mu, b)) = cell.into_iter().find(|(mu, b)| {
            shared_pts.iter().all(|p| (p.iter().zip(mu).map(|(x, m)| x * m).sum::<f64>() - b).abs() <= 1e-9)
        }) else {
            return Ok(None);
        };
        let side = |t: f64| -> Result<f64> {
            let (slope, _) = combine(&self.facets, &[i, j], &[1.0 - t, t]);
            let a = affine_best_response(self.agent, &slope)?;
            Ok(a.iter().zip(&mu).map(|(x, m)| x * m).sum::<f64>() - b)
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (s_lo, s_hi) = (side(lo)?, side(hi)?);
        if s_lo.signum() == s_hi.signum() && s_lo != 0.0 && s_hi != 0.0 {
            self.trace.push(format!("no sign change between facets {i} and {j}"));
            return Ok(None);
        }
        let lo_positive = s_lo > 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (side(mid)? > 0.0) == lo_positive {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        self.trace.push(format!("bisection between facets {i} and {j} stopped at t = {t}"));
        self.certify(&[i, j], &[1.0 - t, t])
    }

    /// Minimizes the hull distance over convex combinations of the facets
    /// that contain a common face.
    fn search_faces(&mut self) -> Result<Option<SelfOwnedHyperplane>> {
        let n = self.facets.len();
        let mut faces: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for subset in 1usize..(1 << n.min(16)) {
            if subset.count_ones() < 2 {
                continue;
            }
            let mut common: Option<Vec<usize>> = None;
            for j in (0..n).filter(|j| subset >> j & 1 == 1) {
                let c = &self.facets[j].contact_set;
                common = Some(match common {
                    None => c.clone(),
                    Some(prev) => prev.into_iter().filter(|m| c.contains(m)).collect(),
                });
            }
            let face = common.unwrap_or_default();
            if face.is_empty() || faces.iter().any(|(f, _)| *f == face) {
                continue;
            }
            let owners: Vec<usize> =
                (0..n).filter(|&j| face.iter().all(|m| self.facets[j].contact_set.contains(m))).collect();
            faces.push((face, owners));
        }
        faces.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        let d = self.w.dim();
        for (face, owners) in faces {
            let points: Vec<Vec<f64>> = face.iter().map(|&m| super::tabular::vertex(d, m)).collect();
            let objective = |weights: &[f64]| -> Result<f64> {
                let (slope, _) = combine(&self.facets, &owners, weights);
                Ok(hull_distance(&points, &affine_best_response(self.agent, &slope)?))
            };
            let weights = minimize_on_simplex(owners.len(), objective)?;
            if let Some(found) = self.certify(&owners, &weights)? {
                return Ok(Some(found));
            }
            self.trace.push(format!("face {face:?}: no self-owned combination of facets {owners:?}"));
        }
        Ok(None)
    }
}

/// Coarse lattice scan of the simplex followed by pairwise mass-transfer
/// pattern search.
fn minimize_on_simplex(k: usize, mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    let levels = match k {
        0..=2 => 64,
        3 => 24,
        4 => 12,
        _ => 6,
    };
    let mut best = vec![1.0 / k as f64; k];
    let mut best_val = f(&best)?;
    let mut counts = vec![0usize; k];
    loop {
        let used: usize = counts[..k - 1].iter().sum();
        if used <= levels {
            counts[k - 1] = levels - used;
            let w: Vec<f64> = counts.iter().map(|c| *c as f64 / levels as f64).collect();
            let v = f(&w)?;
            if v < best_val {
                best_val = v;
                best = w;
            }
        }
        let mut i = 0;
        while i + 1 < k {
            counts[i] += 1;
            if counts[..k - 1].iter().sum::<usize>() <= levels {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        if i + 1 >= k {
            break;
        }
    }
    let mut step = 1.0 / levels as f64;
    while step > 1e-13 && best_val > 0.0 {
        let mut improved = false;
        for from in 0..k {
            for to in 0..k {
                if from == to {
                    continue;
                }
                let delta = step.min(best[from]);
                if delta <= 0.0 {
                    continue;
                }
                let mut w = best.clone();
                w[from] -= delta;
                w[to] += delta;
                let v = f(&w)?;
                if v < best_val {
                    best_val = v;
                    best = w;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// A supporting hyperplane of `w` whose induced action lies in the convex
/// hull of its contact set: a facet if one qualifies, otherwise a bisection
/// between two adjacent facets, otherwise a search over facet combinations
/// around common faces.
pub fn find_self_owned(w: &TabularContract, agent: &AgentType) -> Result<SelfOwnedHyperplane> {
    let d = w.dim();
    check_dim(d, agent.dim())?;
    if d > SELF_OWNED_MAX_DIM {
        return Err(Error::InvalidParameter(format!("self-owned search supports d <= {SELF_OWNED_MAX_DIM}, got {d}")));
    }
    let tol = 1e-9 * (1.0 + w.payments().iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut search = Search { w, agent, facets: upper_facets(w), tol, trace: Vec::new() };
    let (found, visited) = search.walk()?;
    if let Some(found) = found {
        return Ok(found);
    }
    let k = visited.len();
    let cycle_pair = (k >= 3 && visited[k - 1] == visited[k - 3]).then(|| (visited[k - 3], visited[k - 2]));
    if let Some((i, j)) = cycle_pair {
        if let Some(found) = search.bisect(i, j)? {
            return Ok(found);
        }
    }
    if let Some(found) = search.search_faces()? {
        return Ok(found);
    }
    Err(Error::SelfOwnedNotFound(search.trace.join("; ")))
}

/// Drops the offset of an affine contract. Negative slope components are
/// raised to zero, which leaves the induced action unchanged (that task's
/// effort is zero either way) and respects limited liability.
pub fn improve_to_linear(facet: &AffineContractFacet, agent: &AgentType) -> Result<Contract> {
    check_dim(agent.dim(), facet.dim())?;
    if facet.intercept < -1e-12 {
        return Err(Error::NegativeIntercept(facet.intercept));
    }
    Contract::new(facet.slope.iter().map(|s| s.max(0.0)).collect())
}
