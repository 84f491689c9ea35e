//! Chebyshev–Gauss–Lobatto collocation on `[-1, 1]`.
//!
//! Nodes are ordered `s_j = cos(π j / (n-1))`, so index 0 is `s = +1` and
//! index `n-1` is `s = -1`.

use nalgebra::DMatrix;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct Cheb {
    pub n: usize,
    pub s: Vec<f64>,
    /// First-derivative matrix, row-major.
    pub d: Vec<f64>,
    /// Second-derivative matrix, row-major.
    pub d2: Vec<f64>,
    /// Clenshaw–Curtis quadrature weights on `[-1, 1]`.
    pub w: Vec<f64>,
    /// Indefinite integral from `s = -1`, row-major.
    pub int_from_bottom: Vec<f64>,
}

impl Cheb {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "need at least three Chebyshev points");
        let m = n - 1;
        let s: Vec<f64> = (0..n).map(|j| (PI * j as f64 / m as f64).cos()).collect();
        let c = |j: usize| -> f64 {
            let base = if j == 0 || j == m { 2.0 } else { 1.0 };
            if j.is_multiple_of(2) { base } else { -base }
        };
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i * n + j] = c(i) / c(j) / (s[i] - s[j]);
                }
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| d[i * n + j]).sum();
            d[i * n + i] = -row;
        }
        let dm = DMatrix::from_row_slice(n, n, &d);
        let d2m = &dm * &dm;
        let d2: Vec<f64> = (0..n * n).map(|k| d2m[(k / n, k % n)]).collect();
        let w = clenshaw_curtis(n);
        let int_from_bottom = integration_matrix(&s);
        Cheb { n, s, d, d2, w, int_from_bottom }
    }

    /// Apply an `n × n` row-major matrix along the slow (plane) index of a
    /// stacked buffer with `np` points per plane.
    pub fn apply_planes(&self, mat: &[f64], f: &[f64], np: usize) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(f.len(), n * np);
        let mut out = vec![0.0; n * np];
        for i in 0..n {
            let dst = &mut out[i * np..(i + 1) * np];
            for j in 0..n {
                let a = mat[i * n + j];
                if a == 0.0 {
                    continue;
                }
                let src = &f[j * np..(j + 1) * np];
                for (o, x) in dst.iter_mut().zip(src) {
                    *o += a * x;
                }
            }
        }
        out
    }

    /// `∂s` of a stacked buffer.
    pub fn ds(&self, f: &[f64], np: usize) -> Vec<f64> {
        self.apply_planes(&self.d, f, np)
    }

    /// `∂s²` of a stacked buffer.
    pub fn dss(&self, f: &[f64], np: usize) -> Vec<f64> {
        self.apply_planes(&self.d2, f, np)
    }
}

fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let m = n - 1;
    let theta: Vec<f64> = (0..n).map(|j| PI * j as f64 / m as f64).collect();
    let mut w = vec![0.0; n];
    let interior = 1..m;
    let mut v = vec![1.0; m.saturating_sub(1)];
    if m.is_multiple_of(2) {
        w[0] = 1.0 / (m * m - 1) as f64;
        w[m] = w[0];
        for k in 1..m / 2 {
            for (idx, j) in interior.clone().enumerate() {
                v[idx] -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4 * k * k - 1) as f64;
            }
        }
        for (idx, j) in interior.clone().enumerate() {
            v[idx] -= (m as f64 * theta[j]).cos() / (m * m - 1) as f64;
        }
    } else {
        w[0] = 1.0 / (m * m) as f64;
        w[m] = w[0];
        for k in 1..=(m - 1) / 2 {
            for (idx, j) in interior.clone().enumerate() {
                v[idx] -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4 * k * k - 1) as f64;
            }
        }
    }
    for (idx, j) in interior.enumerate() {
        w[j] = 2.0 * v[idx] / m as f64;
    }
    w
}

/// Matrix of the exact integral of the interpolant from `-1` to each node.
fn integration_matrix(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    // Values -> Chebyshev coefficients.
    let t = DMatrix::from_fn(n, n, |j, k| (k as f64 * s[j].acos()).cos());
    let tinv = t.try_inverse().expect("Chebyshev Vandermonde is invertible");
    let cheb_t = |k: usize, x: f64| (k as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    let mut q = vec![0.0; n * n];
    for col in 0..n {
        // Coefficients of the cardinal function for node `col`.
        let a: Vec<f64> = (0..n).map(|k| tinv[(k, col)]).collect();
        // Antiderivative coefficients, degree up to n.
        let mut b = vec![0.0; n + 1];
        for (k, &ak) in a.iter().enumerate() {
            match k {
                0 => b[1] += ak,
                1 => b[2] += ak / 4.0,
                _ => {
                    b[k + 1] += ak / (2.0 * (k + 1) as f64);
                    b[k - 1] -= ak / (2.0 * (k - 1) as f64);
                }
            }
        }
        let eval = |x: f64| -> f64 { b.iter().enumerate().map(|(k, bk)| bk * cheb_t(k, x)).sum() };
        let base = eval(-1.0);
        for (row, &x) in s.iter().enumerate() {
            q[row * n + col] = eval(x) - base;
        }
    }
    q
}
