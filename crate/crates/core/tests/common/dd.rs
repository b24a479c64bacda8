//! Double-double arithmetic (about 32 significant digits) and an EDM
//! strong-regularity oracle built on it.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let q = self.hi.sqrt();
        let (p, e) = two_prod(q, q);
        let r = (self - Dd { hi: p, lo: e }).hi;
        Dd::norm(q, r / (2.0 * q))
    }

    pub fn signum(self) -> f64 {
        if self.hi < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::norm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::norm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        Dd::norm(q1, q2) + Dd::new(q3)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi in double-double.
pub fn sym_eigenvalues(mut a: Vec<Vec<Dd>>) -> Vec<Dd> {
    let n = a.len();
    for _ in 0..60 {
        let mut off = Dd::ZERO;
        let mut tot = Dd::ZERO;
        for i in 0..n {
            for j in 0..n {
                let sq = a[i][j] * a[i][j];
                tot = tot + sq;
                if i != j {
                    off = off + sq;
                }
            }
        }
        if off.hi <= 1e-62 * tot.hi || off.hi == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].hi == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (Dd::new(2.0) * a[p][q]);
                let t = Dd::new(theta.signum()) / (theta.abs() + (theta * theta + Dd::ONE).sqrt());
                let c = Dd::ONE / (t * t + Dd::ONE).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Rank decision for the EDM regularity system, carried out in
/// double-double from the points themselves.
///
/// Unknowns are every diagonal entry plus each known pair `i < j`. For a
/// unit perturbation `E`, `G(E) = −QEQ` with the Householder matrix
/// `Q = I − 2vvᵀ/vᵀv`, `v = 1 + √n·e_n`, written out entrywise. Returns
/// `(unknowns, rank)`.
pub fn edm_rank_oracle(points: &[Vec<f64>], known: &[(usize, usize)]) -> (usize, usize) {
    let n = points.len();
    let m = n - 1;
    let dd = |x: f64| Dd::new(x);
    let mut dmat = vec![vec![Dd::ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Dd::ZERO;
            for (a, b) in points[i].iter().zip(&points[j]) {
                let d = dd(*a) - dd(*b);
                acc = acc + d * d;
            }
            dmat[i][j] = acc;
        }
    }
    let mut v = vec![Dd::ONE; n];
    v[n - 1] = Dd::ONE + dd(n as f64).sqrt();
    let vtv = v.iter().fold(Dd::ZERO, |acc, x| acc + *x * *x);
    let beta = dd(2.0) / vtv;
    let q: Vec<Vec<Dd>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Dd::ONE } else { Dd::ZERO } - beta * v[i] * v[j]).collect())
        .collect();
    let matmul = |a: &[Vec<Dd>], b: &[Vec<Dd>]| -> Vec<Vec<Dd>> {
        let (r, k, c) = (a.len(), b.len(), b[0].len());
        (0..r).map(|i| (0..c).map(|j| (0..k).fold(Dd::ZERO, |acc, t| acc + a[i][t] * b[t][j])).collect()).collect()
    };
    let g = matmul(&matmul(&q, &dmat), &q);
    let x_hat: Vec<Vec<Dd>> = (0..m).map(|i| (0..m).map(|j| -g[i][j]).collect()).collect();

    let mut unknowns: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    unknowns.extend(known.iter().map(|&(i, j)| (i.min(j), i.max(j))).filter(|(i, j)| i != j));
    let cols: Vec<Vec<Dd>> = unknowns
        .iter()
        .map(|&(i, j)| {
            let ge = |a: usize, b: usize| -> Dd {
                if i == j {
                    -(q[a][i] * q[i][b])
                } else {
                    -(q[a][i] * q[j][b] + q[a][j] * q[i][b])
                }
            };
            let mut col: Vec<Dd> = (0..n).map(|r| ge(r, n - 1)).collect();
            for a in 0..m {
                for b in 0..m {
                    col.push((0..m).fold(Dd::ZERO, |acc, c| acc + x_hat[a][c] * ge(c, b)));
                }
            }
            col
        })
        .collect();
    let k = cols.len();
    let gram: Vec<Vec<Dd>> = (0..k)
        .map(|a| (0..k).map(|b| cols[a].iter().zip(&cols[b]).fold(Dd::ZERO, |acc, (x, y)| acc + *x * *y)).collect())
        .collect();
    let sigma: Vec<f64> = sym_eigenvalues(gram).into_iter().map(|mu| mu.to_f64().max(0.0).sqrt()).collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let thr = 1e-10 * smax.max(1.0);
    (k, sigma.iter().filter(|s| **s > thr).count())
}
