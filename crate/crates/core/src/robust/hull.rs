//! Upper hull of the lifted graph `{(x, w(x)) : x ∈ {0,1}^d}`.
//!
//! Every non-vertical facet of that hull is an affine function dominating the
//! payment table and touching it on a contact set; their projections tile the
//! cube. Small dimensions are solved by trying every `(d+1)`-subset of lifted
//! points. Larger ones use gift wrapping: crossing a ridge has a closed form in
//! the lifted space, and the ridges of a facet are the facets of its contact
//! polytope, found by a recursive (memoized) wrap inside the cube.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::tabular::{vertex, TabularContract};
use crate::rng::{round_rng, Stream};

/// Tolerance for geometric predicates on cube coordinates.
pub(crate) const GEOM_TOL: f64 = 1e-9;

/// Dimension up to which facets come from exhaustive subset enumeration.
pub const EXHAUSTIVE_MAX_DIM: usize = 3;

/// Affine contract `x ↦ ⟨slope, x⟩ + intercept` supporting the lifted graph
/// from above. `contact_set` holds vertex bitmasks in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineContractFacet {
    pub slope: Vec<f64>,
    pub intercept: f64,
    pub contact_set: Vec<usize>,
    /// Last component of the unit normal `(−slope, 1)/‖(−slope, 1)‖`.
    pub normal_last: f64,
}

impl AffineContractFacet {
    pub fn new(slope: Vec<f64>, intercept: f64, contact_set: Vec<usize>) -> Self {
        let normal_last = 1.0 / (1.0 + slope.iter().map(|s| s * s).sum::<f64>()).sqrt();
        Self { slope, intercept, contact_set, normal_last }
    }

    pub fn dim(&self) -> usize {
        self.slope.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.slope.iter().zip(x).map(|(s, x)| s * x).sum::<f64>() + self.intercept
    }

    pub fn contact_points(&self) -> Vec<Vec<f64>> {
        self.contact_set.iter().map(|&m| vertex(self.dim(), m)).collect()
    }
}

fn value_tolerance(values: &[f64]) -> f64 {
    1e-9 * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Every upper facet of the lifted graph of `w`, ordered by contact set.
pub fn upper_facets(w: &TabularContract) -> Vec<AffineContractFacet> {
    upper_facets_of_values(w.dim(), w.payments())
}

/// Same as [`upper_facets`] for an arbitrary finite table.
pub(crate) fn upper_facets_of_values(d: usize, values: &[f64]) -> Vec<AffineContractFacet> {
    if d <= EXHAUSTIVE_MAX_DIM {
        upper_facets_exhaustive(d, values)
    } else {
        upper_facets_wrapped(d, values)
    }
}

/// Smallest normal last component over the facets; positive for any table.
pub fn validity_epsilon(facets: &[AffineContractFacet]) -> f64 {
    facets.iter().map(|f| f.normal_last).fold(f64::INFINITY, f64::min)
}

/// Concave envelope `ŵ(x) = min_H φ_H(x)` on the cube.
pub fn concave_envelope(facets: &[AffineContractFacet], x: &[f64]) -> f64 {
    facets.iter().map(|f| f.value(x)).fold(f64::INFINITY, f64::min)
}

fn fit_affine(d: usize, values: &[f64], masks: &[usize]) -> Option<(Vec<f64>, f64)> {
    let rows = masks.len();
    let mut a = DMatrix::zeros(rows, d + 1);
    let mut b = DVector::zeros(rows);
    for (r, &m) in masks.iter().enumerate() {
        for (c, x) in vertex(d, m).into_iter().enumerate() {
            a[(r, c)] = x;
        }
        a[(r, d)] = 1.0;
        b[r] = values[m];
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() < 1e-9 * smax || rows < d + 1 {
        return None;
    }
    let sol = svd.solve(&b, 0.0).ok()?;
    Some((sol.iter().take(d).copied().collect(), sol[d]))
}

/// Contact set of an affine candidate, or `None` if it does not dominate.
pub(crate) fn contact_if_supporting(
    d: usize,
    values: &[f64],
    slope: &[f64],
    intercept: f64,
    tol: f64,
) -> Option<Vec<usize>> {
    let mut contact = Vec::new();
    for (m, w) in values.iter().enumerate() {
        let f: f64 = vertex(d, m).iter().zip(slope).map(|(x, s)| x * s).sum::<f64>() + intercept;
        if f < w - tol {
            return None;
        }
        if f - w <= tol {
            contact.push(m);
        }
    }
    Some(contact)
}

/// Refits on the full contact set so chained updates cannot drift.
fn settle(d: usize, values: &[f64], slope: Vec<f64>, intercept: f64, tol: f64) -> Option<AffineContractFacet> {
    let contact = contact_if_supporting(d, values, &slope, intercept, tol)?;
    let (slope, intercept) = fit_affine(d, values, &contact)?;
    let contact = contact_if_supporting(d, values, &slope, intercept, tol)?;
    Some(AffineContractFacet::new(slope, intercept, contact))
}

pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn upper_facets_exhaustive(d: usize, values: &[f64]) -> Vec<AffineContractFacet> {
    let tol = value_tolerance(values);
    let mut found: BTreeMap<Vec<usize>, AffineContractFacet> = BTreeMap::new();
    for_each_combination(values.len(), d + 1, |subset| {
        let Some((slope, intercept)) = fit_affine(d, values, subset) else { return };
        if let Some(contact) = contact_if_supporting(d, values, &slope, intercept, tol) {
            if !found.contains_key(&contact) {
                if let Some(f) = settle(d, values, slope, intercept, tol) {
                    found.insert(f.contact_set.clone(), f);
                }
            }
        }
    });
    found.into_values().collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Gram-Schmidt; drops vectors already in the span.
fn orthonormalize(vectors: impl IntoIterator<Item = Vec<f64>>, basis: &mut Vec<Vec<f64>>) {
    for mut v in vectors {
        for _ in 0..2 {
            for q in basis.iter() {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, q)| *x -= c * q);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > GEOM_TOL {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Unit vector in `span(space)` orthogonal to the orthonormal set `exclude`.
fn orthogonal_unit(space: &[Vec<f64>], exclude: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in space {
        let mut v = s.clone();
        for _ in 0..2 {
            for q in exclude {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, q)| *x -= c * q);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if best.as_ref().is_none_or(|(b, _)| norm > *b) {
            best = Some((norm, v));
        }
    }
    let (norm, v) = best?;
    (norm > 1e-6).then(|| v.into_iter().map(|x| x / norm).collect())
}

/// Face structure of polytopes spanned by cube vertices, memoized by vertex
/// set.
pub(crate) struct CubeGeometry {
    d: usize,
    points: Vec<Vec<f64>>,
    memo: HashMap<Vec<usize>, Vec<Vec<usize>>>,
}

impl CubeGeometry {
    pub(crate) fn new(d: usize) -> Self {
        Self { d, points: (0..1usize << d).map(|m| vertex(d, m)).collect(), memo: HashMap::new() }
    }

    fn directions(&self, members: &[usize]) -> Vec<Vec<f64>> {
        let mut basis = Vec::new();
        if let Some((&first, rest)) = members.split_first() {
            let p0 = &self.points[first];
            orthonormalize(rest.iter().map(|&m| sub(&self.points[m], p0)), &mut basis);
        }
        basis
    }

    fn support(&self, members: &[usize], normal: &[f64]) -> Vec<usize> {
        let top = members.iter().map(|&m| dot(normal, &self.points[m])).fold(f64::NEG_INFINITY, f64::max);
        members.iter().copied().filter(|&m| dot(normal, &self.points[m]) >= top - GEOM_TOL).collect()
    }

    /// Rotates the supporting hyperplane with normal `n` about the hinge
    /// through `anchor` orthogonal to `n` and `m`, toward `m`, until it hits
    /// another point.
    fn rotate(&self, members: &[usize], n: &[f64], m: &[f64], anchor: &[f64]) -> Vec<f64> {
        let mut phi = f64::INFINITY;
        for &p in members {
            let rel = sub(&self.points[p], anchor);
            let (u, v) = (dot(n, &rel), dot(m, &rel));
            if u.hypot(v) <= GEOM_TOL {
                continue;
            }
            let mut alpha = v.atan2(u);
            if alpha < 0.0 {
                alpha += TAU;
            }
            phi = phi.min((alpha - FRAC_PI_2).max(0.0));
        }
        let (s, c) = phi.sin_cos();
        n.iter().zip(m).map(|(n, m)| c * n + s * m).collect()
    }

    /// Facets (as vertex sets) of the convex hull of `members` inside its own
    /// affine hull.
    pub(crate) fn face_facets(&mut self, members: &[usize]) -> Vec<Vec<usize>> {
        if let Some(hit) = self.memo.get(members) {
            return hit.clone();
        }
        let dirs = self.directions(members);
        let j = dirs.len();
        let mut out: Vec<Vec<usize>> = if j == 0 {
            Vec::new()
        } else if members.len() == j + 1 {
            (0..members.len())
                .map(|k| members.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &m)| m).collect())
                .collect()
        } else if j == 1 {
            let key = |m: &usize| dot(&dirs[0], &self.points[*m]);
            let lo = *members.iter().min_by(|a, b| key(a).total_cmp(&key(b))).expect("nonempty");
            let hi = *members.iter().max_by(|a, b| key(a).total_cmp(&key(b))).expect("nonempty");
            vec![vec![lo], vec![hi]]
        } else {
            self.wrap(members, &dirs)
        };
        out.sort();
        self.memo.insert(members.to_vec(), out.clone());
        out
    }

    fn wrap(&mut self, members: &[usize], space: &[Vec<f64>]) -> Vec<Vec<usize>> {
        let j = space.len();
        let mut n = space[0].clone();
        let mut facet = self.support(members, &n);
        loop {
            let fd = self.directions(&facet);
            if fd.len() + 1 >= j {
                break;
            }
            let mut exclude = vec![n.clone()];
            exclude.extend(fd);
            let m = orthogonal_unit(space, &exclude).expect("face below facet dimension has a free direction");
            let anchor = self.points[facet[0]].clone();
            n = self.rotate(members, &n, &m, &anchor);
            facet = self.support(members, &n);
        }
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        seen.insert(facet.clone());
        let mut queue = VecDeque::from([(facet, n)]);
        while let Some((facet, n)) = queue.pop_front() {
            for ridge in self.face_facets(&facet) {
                let mut exclude = vec![n.clone()];
                orthonormalize(self.directions(&ridge), &mut exclude);
                let Some(mut m) = orthogonal_unit(space, &exclude) else { continue };
                let anchor = self.points[ridge[0]].clone();
                if let Some(&p) = facet.iter().find(|p| !ridge.contains(p)) {
                    if dot(&m, &sub(&self.points[p], &anchor)) > 0.0 {
                        m.iter_mut().for_each(|x| *x = -*x);
                    }
                }
                let n2 = self.rotate(members, &n, &m, &anchor);
                let next = self.support(members, &n2);
                if seen.insert(next.clone()) {
                    queue.push_back((next, n2));
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Outward unit normal and offset of `ridge` as a facet of the
    /// full-dimensional polytope spanned by `parent`.
    fn halfspace(&self, ridge: &[usize], parent: &[usize]) -> Option<(Vec<f64>, f64)> {
        let identity: Vec<Vec<f64>> =
            (0..self.d).map(|i| (0..self.d).map(|k| (i == k) as u8 as f64).collect()).collect();
        let mut mu = orthogonal_unit(&identity, &self.directions(ridge))?;
        let anchor = &self.points[ridge[0]];
        if let Some(&p) = parent.iter().find(|p| !ridge.contains(p)) {
            if dot(&mu, &sub(&self.points[p], anchor)) > 0.0 {
                mu.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let b = dot(&mu, anchor);
        Some((mu, b))
    }

    /// Half-space description of a full-dimensional vertex set's hull.
    pub(crate) fn halfspaces(&mut self, members: &[usize]) -> Option<Vec<(Vec<f64>, f64)>> {
        if self.directions(members).len() != self.d {
            return None;
        }
        self.face_facets(members).iter().map(|r| self.halfspace(r, members)).collect()
    }
}

/// The first facet: recursively take a facet of the bottom face `x_last = 0`
/// and tilt it up in the last coordinate until it touches the top face.
fn initial_facet(d: usize, values: &[f64]) -> (Vec<f64>, f64) {
    if d == 1 {
        return (vec![values[1] - values[0]], values[0]);
    }
    let half = 1usize << (d - 1);
    let (mut slope, intercept) = initial_facet(d - 1, &values[..half]);
    let tilt = (half..2 * half)
        .map(|m| {
            let x = vertex(d - 1, m - half);
            values[m] - (dot(&slope, &x) + intercept)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    slope.push(tilt);
    (slope, intercept)
}

pub(crate) fn upper_facets_wrapped(d: usize, values: &[f64]) -> Vec<AffineContractFacet> {
    let tol = value_tolerance(values);
    let mut geo = CubeGeometry::new(d);
    let (slope, intercept) = initial_facet(d, values);
    let first = settle(d, values, slope, intercept, tol).expect("tilted facet supports the graph");
    let mut found: BTreeMap<Vec<usize>, AffineContractFacet> = BTreeMap::new();
    let mut queue = VecDeque::from([first.clone()]);
    found.insert(first.contact_set.clone(), first);
    while let Some(facet) = queue.pop_front() {
        for ridge in geo.face_facets(&facet.contact_set) {
            let Some((mu, b)) = geo.halfspace(&ridge, &facet.contact_set) else { continue };
            let mut step = f64::INFINITY;
            for (m, w) in values.iter().enumerate() {
                let x = &geo.points[m];
                let beyond = dot(&mu, x) - b;
                if beyond > GEOM_TOL {
                    step = step.min((facet.value(x) - w) / beyond);
                }
            }
            if !step.is_finite() {
                continue;
            }
            let slope = facet.slope.iter().zip(&mu).map(|(s, m)| s - step * m).collect();
            let intercept = facet.intercept + step * b;
            if let Some(next) = settle(d, values, slope, intercept, tol) {
                if !found.contains_key(&next.contact_set) {
                    found.insert(next.contact_set.clone(), next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    found.into_values().collect()
}

/// Euclidean distance from `x` to the convex hull of `points`, exact:
/// the nearest point is the projection of `x` onto the affine hull of some
/// affinely independent subset, landing inside that subset's simplex.
pub fn hull_distance(points: &[Vec<f64>], x: &[f64]) -> f64 {
    let d = x.len();
    let mut best = f64::INFINITY;
    for k in 1..=points.len().min(d + 1) {
        for_each_combination(points.len(), k, |subset| {
            if let Some(dist) = simplex_projection_distance(points, subset, x) {
                best = best.min(dist);
            }
        });
    }
    best
}

fn simplex_projection_distance(points: &[Vec<f64>], subset: &[usize], x: &[f64]) -> Option<f64> {
    let base = &points[subset[0]];
    let k = subset.len() - 1;
    if k == 0 {
        return Some(sub(x, base).iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let dirs: Vec<Vec<f64>> = subset[1..].iter().map(|&i| sub(&points[i], base)).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(&dirs[i], &dirs[j]));
    let rel = sub(x, base);
    let rhs = DVector::from_fn(k, |i, _| dot(&dirs[i], &rel));
    let chol = gram.cholesky()?;
    let mu = chol.solve(&rhs);
    if mu.iter().any(|m| *m < -1e-12) || mu.sum() > 1.0 + 1e-12 {
        return None;
    }
    let mut proj = base.clone();
    for (dir, m) in dirs.iter().zip(mu.iter()) {
        proj.iter_mut().zip(dir).for_each(|(p, v)| *p += m * v);
    }
    Some(sub(x, &proj).iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Fraction of `n_probes` uniform points of the cube lying in at least one
/// facet's contact hull. Probes come from a fixed seed.
pub fn triangulation_coverage(facets: &[AffineContractFacet], n_probes: usize) -> f64 {
    triangulation_coverage_seeded(facets, n_probes, 0)
}

pub fn triangulation_coverage_seeded(facets: &[AffineContractFacet], n_probes: usize, seed: u64) -> f64 {
    let Some(d) = facets.first().map(AffineContractFacet::dim) else { return 0.0 };
    if n_probes == 0 {
        return 1.0;
    }
    let mut geo = CubeGeometry::new(d);
    let cells: Vec<Vec<(Vec<f64>, f64)>> = facets.iter().filter_map(|f| geo.halfspaces(&f.contact_set)).collect();
    let covered = (0..n_probes as u64)
        .filter(|&i| {
            let mut rng = round_rng(seed, i, Stream::Probe);
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            cells.iter().any(|cell| cell.iter().all(|(mu, b)| dot(mu, &x) <= b + GEOM_TOL))
        })
        .count();
    covered as f64 / n_probes as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example() -> TabularContract {
        TabularContract::new(2, vec![0.0, 2.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn worked_example_has_two_facets() {
        let facets = upper_facets(&example());
        assert_eq!(facets.len(), 2);
        assert_eq!(facets[0].contact_set, vec![0, 1, 2]);
        assert_eq!(facets[1].contact_set, vec![1, 2, 3]);
        assert_abs_diff_eq!(facets[0].value(&[1.0, 1.0]), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(facets[1].value(&[0.0, 0.0]), 1.0, epsilon = 1e-12);
        assert_eq!(triangulation_coverage(&facets, 10_000), 1.0);
    }

    #[test]
    fn affine_table_is_one_facet() {
        let w = TabularContract::affine(&[1.0, 1.0], 0.0).unwrap();
        let facets = upper_facets(&w);
        assert_eq!(facets.len(), 1);
        assert_eq!(facets[0].contact_set, vec![0, 1, 2, 3]);
        assert_abs_diff_eq!(facets[0].slope[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(facets[0].intercept, 0.0, epsilon = 1e-12);
        assert_eq!(triangulation_coverage(&facets, 1000), 1.0);
    }

    #[test]
    fn wrapping_agrees_with_exhaustive_search() {
        let mut state = 7u64;
        for d in 1..=4 {
            for _ in 0..10 {
                let values: Vec<f64> = (0..1usize << d)
                    .map(|_| {
                        state = crate::rng::splitmix64(state);
                        (state % 4) as f64
                    })
                    .collect();
                let a = upper_facets_exhaustive(d, &values);
                let b = upper_facets_wrapped(d, &values);
                let contacts =
                    |fs: &[AffineContractFacet]| fs.iter().map(|f| f.contact_set.clone()).collect::<Vec<_>>();
                assert_eq!(contacts(&a), contacts(&b), "d={d} values={values:?}");
            }
        }
    }

    #[test]
    fn cube_face_lattice() {
        let mut geo = CubeGeometry::new(4);
        let all: Vec<usize> = (0..16).collect();
        assert_eq!(geo.face_facets(&all).len(), 8);
        let hs = geo.halfspaces(&all).unwrap();
        assert_eq!(hs.len(), 8);
        let w = TabularContract::affine(&[1.0, 0.5, 2.0, 0.0, 1.0, 3.0], 0.25).unwrap();
        let facets = upper_facets(&w);
        assert_eq!(facets.len(), 1);
        assert_eq!(facets[0].contact_set.len(), 64);
    }

    #[test]
    fn hull_distance_examples() {
        let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(hull_distance(&square, &[0.25, 0.25]), 0.0);
        assert_abs_diff_eq!(hull_distance(&square, &[1.0, 1.0]), 0.5f64.sqrt(), epsilon = 1e-12);
        let segment = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_abs_diff_eq!(hull_distance(&segment, &[0.0, 0.0]), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(hull_distance(&segment, &[2.0, 0.0]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn combinations_are_enumerated() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_combination(5, 5, |_| count += 1);
        assert_eq!(count, 1);
    }
}
