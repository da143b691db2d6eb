//! Shared helpers for the integration suites: exhaustive enumeration of
//! randomization outcomes and independent numerical oracles. Everything here
//! is deliberately written from first principles, separate from the library
//! paths it checks.

#![allow(dead_code)]

use attreg::sampling::PairSet;

/// All sorted r-element subsets of 0..n.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let needed = r - cur.len();
        for i in start..=(n - needed) {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    if r == 0 {
        out.push(vec![]);
    } else if r <= n {
        rec(0, n, r, &mut cur, &mut out);
    }
    out
}

/// All pair sets of the given size over [0, d) x [0, d).
pub fn all_pair_sets(d: usize, size: usize) -> Vec<PairSet> {
    combinations(d * d, size)
        .into_iter()
        .map(|flat| PairSet::new(flat.into_iter().map(|p| (p / d, p % d)).collect()).unwrap())
        .collect()
}

/// All length-`len` sequences over 0..d (with-replacement draws).
pub fn index_sequences(d: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * d);
        for seq in &out {
            for i in 0..d {
                let mut s = seq.clone();
                s.push(i);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// Dense linear solve by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-12, "singular oracle system");
        let pivot_row = a[col].clone();
        for row in (col + 1)..n {
            let f = a[row][col] / pivot_row[col];
            if f == 0.0 {
                continue;
            }
            for (av, pv) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *av -= f * pv;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Independent L1-ball projection oracle: bisection on the soft-threshold
/// level solving sum_i max(|w_i| - theta, 0) = B.
pub fn l1_projection_bisection(w: &[f64], b: f64) -> Vec<f64> {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= b {
        return w.to_vec();
    }
    let mut lo = 0.0f64;
    let mut hi = w.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = w.iter().map(|v| (v.abs() - mid).max(0.0)).sum();
        if s > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    w.iter()
        .map(|v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}

/// Minimizer of (1/m) sum (<w,x>-y)^2 + lambda ||w||_2^2 in closed form:
/// (X + lambda I) w = c with X = sum x x^T / m and c = sum y x / m.
pub fn ridge_closed_form(xs: &[Vec<f64>], ys: &[f64], lambda: f64) -> Vec<f64> {
    let d = xs[0].len();
    let m = xs.len() as f64;
    let mut a = vec![vec![0.0; d]; d];
    let mut c = vec![0.0; d];
    for (x, &y) in xs.iter().zip(ys) {
        for i in 0..d {
            for j in 0..d {
                a[i][j] += x[i] * x[j] / m;
            }
            c[i] += y * x[i] / m;
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda;
    }
    solve_linear(a, c)
}

/// Exhaustive grid minimum of `f` over the L1 ball of radius b in 2-D.
pub fn grid_min_l1_ball_2d<F: Fn(&[f64; 2]) -> f64>(b: f64, step: f64, f: F) -> f64 {
    let n = (b / step).floor() as i64;
    let mut best = f64::INFINITY;
    for i in -n..=n {
        let w0 = i as f64 * step;
        let rem = b - w0.abs();
        let k = (rem / step).floor() as i64;
        for j in -k..=k {
            let w1 = j as f64 * step;
            let v = f(&[w0, w1]);
            if v < best {
                best = v;
            }
        }
    }
    best
}

/// n choose r as f64, for enumeration sanity checks.
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut num = 1.0;
    for i in 0..r {
        num *= (n - i) as f64 / (i + 1) as f64;
    }
    num
}
