//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod dd;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// All `P_{K_s}(x)` by enumerating every support `J` with `|J| ≤ s`,
/// keeping `x⁺` on `J`. Members are returned sorted and de-duplicated.
pub fn brute_force_ks(x: &[f64], s: usize) -> (Vec<Vec<f64>>, f64) {
    let m = x.len();
    let mut best = f64::INFINITY;
    let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize > s {
            continue;
        }
        let z: Vec<f64> = (0..m).map(|j| if mask >> j & 1 == 1 { x[j].max(0.0) } else { 0.0 }).collect();
        let d2: f64 = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
        best = best.min(d2);
        cands.push((d2, z));
    }
    let slack = 1e-12 * (1.0 + best);
    let mut members: Vec<Vec<f64>> = cands.into_iter().filter(|(d, _)| *d <= best + slack).map(|(_, z)| z).collect();
    members.sort_by(|a, b| a.partial_cmp(b).unwrap());
    members.dedup();
    (members, best.sqrt())
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Vector whose entries are continuous or small integers (to force ties),
/// chosen per call.
pub fn mixed_vector(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if rng.random_bool(0.5) {
        (0..m).map(|_| rng.random_range(-3.0..3.0)).collect()
    } else {
        (0..m).map(|_| rng.random_range(-2i32..=3) as f64).collect()
    }
}

/// Random point of `K_s` with exactly `nnz` positive entries in `[lo, hi]`.
pub fn sparse_point(m: usize, nnz: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..nnz {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
    }
    let mut x = vec![0.0; m];
    for &j in &idx[..nnz] {
        x[j] = rng.random_range(lo..=hi);
    }
    x
}

/// Plain cyclic-Jacobi eigenvalues of a dense symmetric matrix, descending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].powi(2))
            .sum();
        let tot: f64 = a.iter().flatten().map(|v| v * v).sum();
        if off <= 1e-30 * tot.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut l: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    l.sort_by(|x, y| y.partial_cmp(x).unwrap());
    l
}
