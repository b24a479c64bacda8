mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_ks, dist, max_abs_diff};
use sparsecone::sparsity::{
    decomposition_check, in_ks, inv_proj_ks_contains, normal_cone_ks_contains, normal_cone_ks_sample, proj_as, proj_ks,
    proj_ks_capped, prox_normal_cone_ks_contains, support, ConeBranch,
};
use sparsecone::SparseVecPoint;

fn small_int_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-3i32..=4).prop_map(f64::from), 1..=max_len)
}

fn real_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_len)
}

fn any_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![small_int_vec(max_len), real_vec(max_len)]
}

fn vec_and_s(max_len: usize) -> impl Strategy<Value = (Vec<f64>, usize)> {
    any_vec(max_len).prop_flat_map(|x| {
        let m = x.len();
        (Just(x), 0..=m)
    })
}

/// `P_{A_s}` by enumeration: keep `x` on any `J`, `|J| ≤ s`.
fn brute_force_as(x: &[f64], s: usize) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut cands: Vec<(f64, Vec<f64>)> = (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize <= s)
        .map(|mask| {
            let z: Vec<f64> = (0..m).map(|j| if mask >> j & 1 == 1 { x[j] } else { 0.0 }).collect();
            (dist(x, &z), z)
        })
        .collect();
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    cands.retain(|c| c.0 <= best + 1e-12);
    let mut out: Vec<Vec<f64>> = cands.into_iter().map(|c| c.1).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

proptest! {
    #[test]
    fn ks_projection_matches_enumeration((x, s) in vec_and_s(7)) {
        let (want, d) = brute_force_ks(&x, s);
        let got = proj_ks(&x, s).unwrap();
        prop_assert_eq!(got.member_count as usize, want.len());
        prop_assert!((got.distance - d).abs() < 1e-10);
        prop_assert_eq!(&got.canonical, &got.members[0]);
        let members = sorted(got.members);
        for (a, b) in members.iter().zip(&want) {
            prop_assert!(max_abs_diff(a, b) < 1e-12);
        }
    }

    #[test]
    fn as_projection_matches_enumeration((x, s) in vec_and_s(7)) {
        let want = brute_force_as(&x, s);
        let got = proj_as(&x, s).unwrap();
        prop_assert_eq!(sorted(got.members), want);
    }

    #[test]
    fn members_are_feasible_and_equidistant((x, s) in vec_and_s(8)) {
        let p = proj_ks(&x, s).unwrap();
        for y in &p.members {
            prop_assert!(in_ks(y, s));
            prop_assert!((dist(&x, y) - p.distance).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent((x, s) in vec_and_s(8)) {
        let y = proj_ks(&x, s).unwrap().canonical;
        let p = proj_ks(&y, s).unwrap();
        prop_assert!(p.is_singleton());
        prop_assert_eq!(p.canonical, y);
    }

    #[test]
    fn members_pass_decomposition_and_inverse((x, s) in vec_and_s(8)) {
        for y in proj_ks(&x, s).unwrap().members {
            prop_assert!(decomposition_check(&x, &y, s).unwrap());
            prop_assert!(inv_proj_ks_contains(&SparseVecPoint::new(y), &x, s).unwrap());
        }
    }

    /// Moving from `x̄` along a proximal normal keeps `x̄` among the
    /// projections for a short step.
    #[test]
    fn proximal_normals_are_realised(seed in any::<u64>(), m in 2usize..7, s_off in 0usize..6) {
        let s = 1 + s_off % (m - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nnz = (seed as usize) % (s + 1);
        let xbar = common::sparse_point(m, nnz, 0.5, 2.0, &mut rng);
        let pt = SparseVecPoint::new(xbar.clone());
        for y in normal_cone_ks_sample(&pt, s, 20, seed).unwrap() {
            if !prox_normal_cone_ks_contains(&pt, &y, s).unwrap() {
                continue;
            }
            let scale = 0.1 / (1.0 + y.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            let x: Vec<f64> = xbar.iter().zip(&y).map(|(a, b)| a + scale * b).collect();
            prop_assert!(proj_ks(&x, s).unwrap().contains(&xbar, 1e-12), "x̄={:?} y={:?}", xbar, y);
        }
    }

    #[test]
    fn proximal_cone_inside_limiting_cone(seed in any::<u64>(), m in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = 1 + (seed as usize) % (m - 1);
        let nnz = (seed as usize / 7) % (s + 1);
        let xbar = SparseVecPoint::new(common::sparse_point(m, nnz, 0.5, 2.0, &mut rng));
        let ys = common::mixed_vector(m, &mut rng);
        let masked: Vec<f64> = ys.iter().enumerate().map(|(j, v)| if xbar.is_zero_at(j) { *v } else { 0.0 }).collect();
        for y in [ys, masked] {
            if prox_normal_cone_ks_contains(&xbar, &y, s).unwrap() {
                prop_assert!(normal_cone_ks_contains(&xbar, &y, s).unwrap().is_member);
            }
        }
    }

    #[test]
    fn sampled_normals_are_members(seed in any::<u64>(), m in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = 1 + (seed as usize) % (m - 1);
        let xbar = SparseVecPoint::new(common::sparse_point(m, (seed as usize / 3) % (s + 1), 0.2, 3.0, &mut rng));
        let ys = normal_cone_ks_sample(&xbar, s, 30, seed).unwrap();
        prop_assert_eq!(ys.len(), 30);
        for y in ys {
            let r = normal_cone_ks_contains(&xbar, &y, s).unwrap();
            prop_assert!(r.is_member);
            prop_assert_ne!(r.branch, ConeBranch::None);
        }
    }
}

#[test]
fn tie_explosion_is_capped() {
    let p = proj_ks(&[0.0; 12], 6).unwrap();
    assert_eq!(p.canonical, vec![0.0; 12]);
    assert!(p.is_singleton());

    let ones = vec![1.0; 12];
    let p = proj_ks(&ones, 6).unwrap();
    assert_eq!(p.member_count, 924);
    assert!(p.truncated);
    assert_eq!(p.members, vec![p.canonical.clone()]);
    assert_eq!(p.canonical, [vec![1.0; 6], vec![0.0; 6]].concat());

    let p = proj_ks_capped(&ones, 6, 1000).unwrap();
    assert!(!p.truncated);
    assert_eq!(p.members.len(), 924);
}

#[test]
fn support_ignores_round_off() {
    assert_eq!(support(&[1.0, 1e-14, -2.0, 0.0]), vec![0, 2]);
}

#[test]
fn cone_branches() {
    let xbar = SparseVecPoint::new(vec![2.0, 0.0, 0.0, 0.0]);
    let check = |y: &[f64]| normal_cone_ks_contains(&xbar, y, 2).unwrap();
    assert_eq!(check(&[0.0, -1.0, -1.0, -1.0]).branch, ConeBranch::NonpositiveBranch);
    assert_eq!(check(&[0.0, 1.0, -1.0, 0.0]).branch, ConeBranch::SparsityBranch);
    assert_eq!(check(&[0.0, -1.0, 0.0, 0.0]).branch, ConeBranch::Both);
    let bad = check(&[1.0, 0.0, 0.0, 0.0]);
    assert!(!bad.is_member);
    assert!(bad.violated_condition.is_some());
}
