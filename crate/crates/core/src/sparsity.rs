//! Non-negative sparse vectors `K_s = {x ≥ 0 : ‖x‖₀ ≤ s}` and sparse vectors
//! `A_s = {x : ‖x‖₀ ≤ s}`: projections, the decomposition test, inverse
//! projections and normal cones.
//!
//! Supports and `‖·‖₀` use the global zero tolerance
//! ([`crate::tol::vector_zero_threshold`]). Projections themselves are exact:
//! ties between entries are ties of equal floating-point values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{dist, sort_desc};
use crate::tol::vector_zero_threshold;

/// Default cap on the number of enumerated projection members.
pub const MEMBER_CAP: usize = 512;

/// A vector together with its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVecPoint {
    x: Vec<f64>,
    support: Vec<usize>,
    s_level: Option<usize>,
}

impl SparseVecPoint {
    pub fn new(x: Vec<f64>) -> Self {
        let support = support(&x);
        Self { x, support, s_level: None }
    }

    pub fn with_sparsity(x: Vec<f64>, s: usize) -> Result<Self> {
        check_s(x.len(), s)?;
        let mut p = Self::new(x);
        p.s_level = Some(s);
        Ok(p)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn s_level(&self) -> Option<usize> {
        self.s_level
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `‖x‖₀`.
    pub fn l0(&self) -> usize {
        self.support.len()
    }

    pub fn is_zero_at(&self, j: usize) -> bool {
        self.support.binary_search(&j).is_err()
    }
}

impl From<Vec<f64>> for SparseVecPoint {
    fn from(x: Vec<f64>) -> Self {
        Self::new(x)
    }
}

/// Indices of entries that are nonzero under the global tolerance.
pub fn support(x: &[f64]) -> Vec<usize> {
    let thr = vector_zero_threshold(x);
    (0..x.len()).filter(|&j| x[j].abs() > thr).collect()
}

/// `‖x‖₀` under the global tolerance.
pub fn l0(x: &[f64]) -> usize {
    support(x).len()
}

/// Whether `x ∈ K_s` (entries may be negative by at most the zero threshold).
pub fn in_ks(x: &[f64], s: usize) -> bool {
    let thr = vector_zero_threshold(x);
    x.iter().all(|v| *v >= -thr) && l0(x) <= s
}

fn check_s(m: usize, s: usize) -> Result<()> {
    if s > m {
        Err(Error::OutOfRange(format!("sparsity level s = {s} exceeds dimension {m}")))
    } else {
        Ok(())
    }
}

/// Set-valued projection result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    /// Distinct members of the projection; only `canonical` when truncated.
    pub members: Vec<Vec<f64>>,
    pub canonical: Vec<f64>,
    pub distance: f64,
    /// Number of distinct members of the full projection (saturating).
    pub member_count: u64,
    /// Set when `member_count` exceeded the enumeration cap.
    pub truncated: bool,
}

impl ProjectionResult {
    pub fn is_singleton(&self) -> bool {
        self.member_count == 1
    }

    /// Whether `y` equals one of the enumerated members entrywise within `tol`.
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        self.members.iter().any(|m| m.len() == y.len() && m.iter().zip(y).all(|(a, b)| (a - b).abs() <= tol))
    }
}

/// `x⁺ = max(x, 0)` entrywise.
pub fn proj_nonneg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// `P_{K_s}(x)`: keep the `s` largest entries of `x⁺`, all ties enumerated.
pub fn proj_ks(x: &[f64], s: usize) -> Result<ProjectionResult> {
    proj_ks_capped(x, s, MEMBER_CAP)
}

pub fn proj_ks_capped(x: &[f64], s: usize, cap: usize) -> Result<ProjectionResult> {
    check_s(x.len(), s)?;
    let plus = proj_nonneg(x);
    Ok(threshold_projection(x, &plus, &plus, s, cap))
}

/// `P_{A_s}(x)`: keep the `s` largest-magnitude entries, all ties enumerated.
pub fn proj_as(x: &[f64], s: usize) -> Result<ProjectionResult> {
    proj_as_capped(x, s, MEMBER_CAP)
}

pub fn proj_as_capped(x: &[f64], s: usize, cap: usize) -> Result<ProjectionResult> {
    check_s(x.len(), s)?;
    let score: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    Ok(threshold_projection(x, &score, x, s, cap))
}

fn binomial_saturating(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Keep the `s` entries with largest `score` (score ≥ 0), copying `values`.
fn threshold_projection(x: &[f64], score: &[f64], values: &[f64], s: usize, cap: usize) -> ProjectionResult {
    let m = x.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| score[j].total_cmp(&score[i]).then(i.cmp(&j)));

    let build = |keep: &[usize]| {
        let mut y = vec![0.0; m];
        for &j in keep {
            y[j] = values[j];
        }
        y
    };
    let finish = |members: Vec<Vec<f64>>, count: u64, truncated: bool| {
        let canonical = members[0].clone();
        let distance = dist(x, &canonical);
        ProjectionResult { members, canonical, distance, member_count: count, truncated }
    };

    if s == 0 {
        return finish(vec![vec![0.0; m]], 1, false);
    }
    let t = score[order[s - 1]];
    if t == 0.0 {
        // fewer than s positive scores: every choice of J gives the same vector
        let keep: Vec<usize> = order.iter().copied().take_while(|&j| score[j] > 0.0).collect();
        return finish(vec![build(&keep)], 1, false);
    }
    let above: Vec<usize> = order.iter().copied().take_while(|&j| score[j] > t).collect();
    let ties: Vec<usize> = order.iter().copied().filter(|&j| score[j] == t).collect();
    let need = s - above.len();
    let count = binomial_saturating(ties.len(), need);
    if count > cap as u64 {
        let mut keep = above.clone();
        keep.extend_from_slice(&ties[..need]);
        return finish(vec![build(&keep)], count, true);
    }
    let mut members = Vec::with_capacity(count as usize);
    let mut comb: Vec<usize> = (0..need).collect();
    loop {
        let mut keep = above.clone();
        keep.extend(comb.iter().map(|&c| ties[c]));
        members.push(build(&keep));
        // next combination in lexicographic order
        let mut i = need;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if comb[i] < ties.len() - need + i {
                comb[i] += 1;
                for k in (i + 1)..need {
                    comb[k] = comb[k - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    finish(members, count, false)
}

/// Test `y ∈ P_{K_s}(x)` through the decomposition `x = y + z`:
/// `y ∈ K_s`, `y ⊙ z = 0` and `[y]_s ≥ [z]_1`.
pub fn decomposition_check(x: &[f64], y: &[f64], s: usize) -> Result<bool> {
    if x.len() != y.len() {
        return Err(dim_mismatch(format!("x has length {}, y has length {}", x.len(), y.len())));
    }
    check_s(x.len(), s)?;
    if x.is_empty() {
        return Ok(true);
    }
    let thr = vector_zero_threshold(x).max(vector_zero_threshold(y));
    if y.iter().any(|v| *v < -thr) || y.iter().filter(|v| v.abs() > thr).count() > s {
        return Ok(false);
    }
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if y.iter().zip(&z).any(|(a, b)| a.abs() > thr && b.abs() > thr) {
        return Ok(false);
    }
    if s == 0 {
        return Ok(true);
    }
    let ys = sort_desc(y)[s - 1];
    let z1 = sort_desc(&z)[0];
    Ok(ys >= z1 - thr)
}

/// Whether `x ∈ P⁻¹_{K_s}(y)` for `y ∈ K_s`.
pub fn inv_proj_ks_contains(y: &SparseVecPoint, x: &[f64], s: usize) -> Result<bool> {
    if x.len() != y.dim() {
        return Err(dim_mismatch(format!("x has length {}, y has length {}", x.len(), y.dim())));
    }
    check_s(y.dim(), s)?;
    if !in_ks(y.x(), s) {
        return Err(Error::NotInSet(format!("y is not in K_{s}")));
    }
    let thr = vector_zero_threshold(x).max(vector_zero_threshold(y.x()));
    let plus = proj_nonneg(x);
    if y.l0() == s {
        let on_support = y.support().iter().all(|&j| (y.x()[j] - x[j]).abs() <= thr);
        let min_y = y.support().iter().map(|&j| y.x()[j]).fold(f64::INFINITY, f64::min);
        let max_off = (0..x.len()).filter(|&j| y.is_zero_at(j)).map(|j| plus[j]).fold(0.0_f64, f64::max);
        Ok(on_support && min_y >= max_off - thr)
    } else {
        Ok(plus.iter().zip(y.x()).all(|(a, b)| (a - b).abs() <= thr))
    }
}

/// Which part of the union `N_{R^m_+}(x̄) ∪ N_{A_s}(x̄)` a vector lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeBranch {
    /// `x̄ ⊙ y = 0, y ≤ 0`
    NonpositiveBranch,
    /// `x̄ ⊙ y = 0, ‖y‖₀ ≤ m − s`
    SparsityBranch,
    Both,
    None,
}

impl ConeBranch {
    pub(crate) fn from_flags(first: bool, second: bool) -> Self {
        match (first, second) {
            (true, true) => ConeBranch::Both,
            (true, false) => ConeBranch::NonpositiveBranch,
            (false, true) => ConeBranch::SparsityBranch,
            (false, false) => ConeBranch::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeMembershipReport {
    pub is_member: bool,
    pub branch: ConeBranch,
    pub violated_condition: Option<String>,
}

fn require_in_ks(xbar: &SparseVecPoint, y: &[f64], s: usize) -> Result<()> {
    if y.len() != xbar.dim() {
        return Err(dim_mismatch(format!("x̄ has length {}, y has length {}", xbar.dim(), y.len())));
    }
    check_s(xbar.dim(), s)?;
    if !in_ks(xbar.x(), s) {
        return Err(Error::NotInSet(format!("x̄ is not in K_{s}")));
    }
    Ok(())
}

/// `x̄ ⊙ y = 0` with both factors judged by their own zero thresholds.
fn complementary(xbar: &SparseVecPoint, y: &[f64]) -> bool {
    let ythr = vector_zero_threshold(y);
    xbar.support().iter().all(|&j| y[j].abs() <= ythr)
}

/// Mordukhovich normal cone membership `y ∈ N_{K_s}(x̄)`.
pub fn normal_cone_ks_contains(xbar: &SparseVecPoint, y: &[f64], s: usize) -> Result<ConeMembershipReport> {
    require_in_ks(xbar, y, s)?;
    let m = xbar.dim();
    if !complementary(xbar, y) {
        return Ok(ConeMembershipReport {
            is_member: false,
            branch: ConeBranch::None,
            violated_condition: Some("x̄ ⊙ y ≠ 0".into()),
        });
    }
    let ythr = vector_zero_threshold(y);
    let nonpos = y.iter().all(|v| *v <= ythr);
    let sparse = l0(y) <= m - s;
    let branch = ConeBranch::from_flags(nonpos, sparse);
    let violated = (branch == ConeBranch::None)
        .then(|| format!("y has a positive entry and ‖y‖₀ = {} > m − s = {}", l0(y), m - s));
    Ok(ConeMembershipReport { is_member: branch != ConeBranch::None, branch, violated_condition: violated })
}

/// Proximal normal cone membership `y ∈ N^prox_{K_s}(x̄)`.
///
/// Below maximal sparsity this is the convex cone `N_{R^m_+}(x̄)`; at
/// `‖x̄‖₀ = s` it is `{y : x̄ ⊙ y = 0}`.
pub fn prox_normal_cone_ks_contains(xbar: &SparseVecPoint, y: &[f64], s: usize) -> Result<bool> {
    require_in_ks(xbar, y, s)?;
    if !complementary(xbar, y) {
        return Ok(false);
    }
    if xbar.l0() == s {
        Ok(true)
    } else {
        let ythr = vector_zero_threshold(y);
        Ok(y.iter().all(|v| *v <= ythr))
    }
}

/// Random members of `N_{K_s}(x̄)` built from the two branches of the cone.
///
/// The first vector is always `0`; the rest alternate between the
/// non-positive branch and the sparsity branch (when it is nontrivial).
/// Deterministic for a given seed.
pub fn normal_cone_ks_sample(xbar: &SparseVecPoint, s: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    require_in_ks(xbar, &vec![0.0; xbar.dim()], s)?;
    let m = xbar.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros: Vec<usize> = (0..m).filter(|&j| xbar.is_zero_at(j)).collect();
    let sparse_cap = (m - s).min(zeros.len());
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut y = vec![0.0; m];
        if k == 0 || zeros.is_empty() {
            out.push(y);
            continue;
        }
        let sparse_turn = k % 2 == 0 && sparse_cap > 0;
        if sparse_turn {
            let size = rng.random_range(1..=sparse_cap);
            for &j in choose(&mut rng, &zeros, size).iter() {
                let v: f64 = rng.sample(StandardNormal);
                y[j] = if v == 0.0 { 1.0 } else { v };
            }
        } else {
            let size = rng.random_range(1..=zeros.len());
            for &j in choose(&mut rng, &zeros, size).iter() {
                let v: f64 = rng.sample(StandardNormal);
                y[j] = -v.abs().max(1e-3);
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn choose(rng: &mut ChaCha8Rng, pool: &[usize], k: usize) -> Vec<usize> {
    let mut p = pool.to_vec();
    for i in 0..k {
        let j = rng.random_range(i..p.len());
        p.swap(i, j);
    }
    p.truncate(k);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive oracle: minimize over all supports of size s of the clamped vector.
    fn brute_force_ks(x: &[f64], s: usize) -> Vec<Vec<f64>> {
        let m = x.len();
        let mut best = f64::INFINITY;
        let mut out: Vec<Vec<f64>> = Vec::new();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != s {
                continue;
            }
            let y: Vec<f64> = (0..m).map(|j| if mask >> j & 1 == 1 { x[j].max(0.0) } else { 0.0 }).collect();
            let d = dist(x, &y);
            if d < best - 1e-12 {
                best = d;
                out.clear();
            }
            if d <= best + 1e-12 && !out.contains(&y) {
                out.push(y);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn proj_ks_examples() {
        let x = [3.0, -1.0, 2.0, 5.0];
        let p = proj_ks(&x, 2).unwrap();
        assert_eq!(p.members, vec![vec![3.0, 0.0, 0.0, 5.0]]);
        assert_eq!(p.members, brute_force_ks(&x, 2));
        assert!((p.distance - 5f64.sqrt()).abs() < 1e-15);

        let p = proj_ks(&[1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(sorted(p.members.clone()), brute_force_ks(&[1.0, 1.0, 1.0], 2));
        assert_eq!(p.member_count, 3);
        assert_eq!(p.canonical, vec![1.0, 1.0, 0.0]);

        let p = proj_ks(&[0.5, 0.0, 2.0], 2).unwrap();
        assert_eq!(p.members, vec![vec![0.5, 0.0, 2.0]]);
        assert_eq!(p.distance, 0.0);

        let p = proj_ks(&[-1.0, -2.0], 1).unwrap();
        assert_eq!(p.members, vec![vec![0.0, 0.0]]);
        assert!(proj_ks(&[1.0], 2).is_err());
    }

    #[test]
    fn proj_as_examples() {
        assert_eq!(proj_as(&[3.0, -4.0, 1.0], 1).unwrap().members, vec![vec![0.0, -4.0, 0.0]]);
        let p = proj_as(&[1.0, -1.0], 1).unwrap();
        assert_eq!(p.members, vec![vec![1.0, 0.0], vec![0.0, -1.0]]);
        let x = vec![0.3, -2.0, 0.0];
        assert_eq!(proj_as(&x, 3).unwrap().members, vec![x]);
    }

    #[test]
    fn proj_nonneg_examples() {
        assert_eq!(proj_nonneg(&[-1.0, 2.0]), vec![0.0, 2.0]);
        assert_eq!(proj_nonneg(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(proj_nonneg(&[5.0, -5.0, 0.0]), vec![5.0, 0.0, 0.0]);
    }

    #[test]
    fn cap_truncates_large_tie_sets() {
        let x = vec![1.0; 12];
        let p = proj_ks_capped(&x, 6, 100).unwrap();
        assert!(p.truncated);
        assert_eq!(p.member_count, 924);
        assert_eq!(p.members.len(), 1);
        assert_eq!(p.canonical, [vec![1.0; 6], vec![0.0; 6]].concat());
        // zero vector: all supports collapse to one member, no blow-up
        let p = proj_ks(&[0.0; 20], 10).unwrap();
        assert_eq!(p.member_count, 1);
    }

    #[test]
    fn decomposition_examples() {
        let x = [3.0, -1.0, 2.0, 5.0];
        assert!(decomposition_check(&x, &[3.0, 0.0, 0.0, 5.0], 2).unwrap());
        assert!(!decomposition_check(&x, &[3.0, 0.0, 2.0, 0.0], 2).unwrap());
        let y = [0.0, 4.0, 1.0];
        assert!(decomposition_check(&y, &y, 2).unwrap());
        assert!(decomposition_check(&x, &[0.0; 4], 0).unwrap());
        assert!(decomposition_check(&x, &[0.0; 3], 1).is_err());
    }

    #[test]
    fn inverse_projection_examples() {
        let y = SparseVecPoint::new(vec![2.0, 0.0]);
        assert!(inv_proj_ks_contains(&y, &[2.0, 1.0], 1).unwrap());
        assert!(!inv_proj_ks_contains(&y, &[2.0, 3.0], 1).unwrap());
        let zero = SparseVecPoint::new(vec![0.0, 0.0]);
        assert!(inv_proj_ks_contains(&zero, &[-4.0, -7.0], 1).unwrap());
        assert!(!inv_proj_ks_contains(&zero, &[-4.0, 0.5], 1).unwrap());
        let not_in = SparseVecPoint::new(vec![1.0, 1.0]);
        assert!(matches!(inv_proj_ks_contains(&not_in, &[0.0, 0.0], 1), Err(Error::NotInSet(_))));
    }

    #[test]
    fn normal_cone_examples() {
        let xbar = SparseVecPoint::new(vec![1.0, 0.0, 0.0]);
        let r = normal_cone_ks_contains(&xbar, &[0.0, -1.0, -2.0], 1).unwrap();
        assert!(r.is_member);
        assert_eq!(r.branch, ConeBranch::Both);
        let r = normal_cone_ks_contains(&xbar, &[0.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(r.branch, ConeBranch::SparsityBranch);
        let r = normal_cone_ks_contains(&xbar, &[1.0, 0.0, 0.0], 1).unwrap();
        assert!(!r.is_member);
        assert_eq!(r.branch, ConeBranch::None);
        assert!(r.violated_condition.is_some());

        // ‖y‖₀ = 3 = m − s
        let xbar = SparseVecPoint::new(vec![1.0, 0.0, 0.0, 0.0]);
        let r = normal_cone_ks_contains(&xbar, &[0.0, 1.0, 1.0, 1.0], 1).unwrap();
        assert!(r.is_member);
        assert_eq!(r.branch, ConeBranch::SparsityBranch);
        let r = normal_cone_ks_contains(&xbar, &[0.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert!(!r.is_member);

        let bad = SparseVecPoint::new(vec![1.0, 1.0]);
        assert!(normal_cone_ks_contains(&bad, &[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn prox_cone_examples() {
        // ‖x̄‖₀ = 1 < s = 2: only the convex cone
        let xbar = SparseVecPoint::new(vec![1.0, 0.0, 0.0]);
        assert!(!prox_normal_cone_ks_contains(&xbar, &[0.0, 1.0, 0.0], 2).unwrap());
        assert!(normal_cone_ks_contains(&xbar, &[0.0, 1.0, 0.0], 2).unwrap().is_member);
        assert!(prox_normal_cone_ks_contains(&xbar, &[0.0, -1.0, 0.0], 2).unwrap());
        // ‖x̄‖₀ = s: agrees with the Mordukhovich cone
        for y in [[0.0, 1.0, -3.0], [0.5, 0.0, 0.0], [0.0, 0.0, 2.0]] {
            assert_eq!(
                prox_normal_cone_ks_contains(&xbar, &y, 1).unwrap(),
                normal_cone_ks_contains(&xbar, &y, 1).unwrap().is_member
            );
        }
        assert!(prox_normal_cone_ks_contains(&xbar, &[0.0; 3], 2).unwrap());
    }

    #[test]
    fn sampler_outputs_are_members() {
        let cases = [
            (vec![1.0, 0.0, 0.0, 2.0, 0.0], 2), // maximal sparsity
            (vec![1.0, 0.0, 0.0, 0.0, 0.0], 3),
            (vec![0.5, 0.0, 0.0], 3), // s = m
            (vec![0.0; 4], 1),
        ];
        for (x, s) in cases {
            let xbar = SparseVecPoint::new(x.clone());
            let ys = normal_cone_ks_sample(&xbar, s, 50, 9).unwrap();
            assert_eq!(ys[0], vec![0.0; x.len()]);
            let mut saw_positive = false;
            for y in &ys {
                let r = normal_cone_ks_contains(&xbar, y, s).unwrap();
                assert!(r.is_member, "{x:?} {s} {y:?}");
                saw_positive |= y.iter().any(|v| *v > 0.0);
                if s == x.len() {
                    assert!(y.iter().all(|v| *v <= 0.0));
                }
                if xbar.l0() == s {
                    assert!(xbar.support().iter().all(|&j| y[j] == 0.0));
                }
            }
            if s < x.len() {
                assert!(saw_positive, "sparsity branch never sampled for {x:?}");
            }
            assert_eq!(ys, normal_cone_ks_sample(&xbar, s, 50, 9).unwrap());
        }
    }
}
