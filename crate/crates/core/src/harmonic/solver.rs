//! Iterative solution of mixed boundary value problems on a mapped grid.
//!
//! Unknowns are grid values. Interior rows carry the metric-form Laplacian,
//! the interface and wall planes carry the boundary condition. Problems with
//! Neumann data on both boundaries are bordered with a Lagrange constant `λ`
//! on the interior rows and a zero-mean constraint; `λ` measures the
//! compatibility defect.

use super::grid::{BulkGrid, Side};
use crate::chebyshev::Cheb;
use crate::error::{PilError, Result};
use crate::spectral::{Fourier2, C64};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Boundary data on one boundary plane, one value per column.
#[derive(Clone, Debug, PartialEq)]
pub enum Bc {
    Dirichlet(Vec<f64>),
    /// Derivative along the outward normal of the region.
    Neumann(Vec<f64>),
}

impl Bc {
    pub fn kind(&self) -> BcKind {
        match self {
            Bc::Dirichlet(_) => BcKind::Dirichlet,
            Bc::Neumann(_) => BcKind::Neumann,
        }
    }

    fn data(&self) -> &[f64] {
        match self {
            Bc::Dirichlet(d) | Bc::Neumann(d) => d,
        }
    }

    pub fn zero_neumann(np: usize) -> Self {
        Bc::Neumann(vec![0.0; np])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, restart: 40, max_iter: 400 }
    }
}

#[derive(Clone, Debug)]
pub struct EllipticSolution {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the final iterate.
    pub residual: f64,
    /// Lagrange constant of a bordered pure-Neumann solve, zero otherwise.
    pub defect: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Restarted right-preconditioned GMRES (flexible form, the preconditioned
/// directions are kept).
pub fn gmres<A, P>(mut apply: A, mut precond: P, b: &[f64], opts: SolverOptions) -> (Vec<f64>, GmresReport)
where
    A: FnMut(&[f64]) -> Vec<f64>,
    P: FnMut(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, GmresReport { iterations: 0, residual: 0.0, converged: true });
    }
    let target = opts.tol * bnorm;
    let m = opts.restart.max(1);
    let mut total = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        if beta <= target || total >= opts.max_iter {
            let converged = beta <= target;
            return (x, GmresReport { iterations: total, residual: beta / bnorm, converged });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|a| a / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        for j in 0..m {
            let zj = precond(&v[j]);
            let mut w = apply(&zj);
            z.push(zj);
            total += 1;
            for i in 0..=j {
                let hij: f64 = w.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                h[i][j] = hij;
                w.iter_mut().zip(&v[i]).for_each(|(a, b)| *a -= hij * b);
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let rr = h[j][j].hypot(h[j + 1][j]);
            if rr == 0.0 {
                k = j;
                break;
            }
            cs[j] = h[j][j] / rr;
            sn[j] = h[j + 1][j] / rr;
            h[j][j] = rr;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k = j + 1;
            if g[j + 1].abs() <= target || total >= opts.max_iter || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|a| a / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.iter_mut().zip(zi).for_each(|(a, b)| *a += yi * b);
        }
    }
}

/// Exact inverse of the constant-coefficient operator on the flat slab of
/// the same thickness, applied mode by mode after a horizontal FFT.
#[derive(Debug)]
pub struct FlatInverse {
    nz: usize,
    bordered: bool,
    /// Per wavenumber class, the row-major inverse (size `nz` or `nz+1`).
    inverses: Vec<Vec<f64>>,
    class_of: Vec<usize>,
    weights: Vec<f64>,
}

impl FlatInverse {
    pub fn new(grid: &Fourier2, cheb: &Cheb, side: Side, thickness: f64, iface: BcKind, wall: BcKind) -> Result<Self> {
        let nz = cheb.n;
        let c = 2.0 / thickness;
        let bordered = iface == BcKind::Neumann && wall == BcKind::Neumann;
        let ip = side.interface_plane(nz);
        let wp = side.wall_plane(nz);
        let mut classes: HashMap<u64, usize> = HashMap::new();
        let mut inverses = Vec::new();
        let mut class_of = vec![0; grid.np()];
        for p in 0..grid.np() {
            let (i, j) = (p / grid.nv, p % grid.nv);
            let k2 = grid.ku(i).powi(2) + grid.kv(j).powi(2);
            let key = k2.round() as u64;
            let next = classes.len();
            let id = *classes.entry(key).or_insert(next);
            if id == next {
                let size = if bordered && key == 0 { nz + 1 } else { nz };
                let mut m = DMatrix::<f64>::zeros(size, size);
                for r in 0..nz {
                    if r == ip || r == wp {
                        let kind = if r == ip { iface } else { wall };
                        match kind {
                            BcKind::Dirichlet => m[(r, r)] = 1.0,
                            BcKind::Neumann => {
                                let sgn = if r == 0 { 1.0 } else { -1.0 };
                                for q in 0..nz {
                                    m[(r, q)] = sgn * c * cheb.d[r * nz + q];
                                }
                            }
                        }
                    } else {
                        for q in 0..nz {
                            m[(r, q)] = c * c * cheb.d2[r * nz + q];
                        }
                        m[(r, r)] -= k2;
                        if size > nz {
                            m[(r, nz)] = 1.0;
                        }
                    }
                }
                if size > nz {
                    for q in 0..nz {
                        m[(nz, q)] = cheb.w[q];
                    }
                }
                let inv = m.try_inverse().ok_or(PilError::SingularInverse)?;
                inverses.push((0..size * size).map(|t| inv[(t / size, t % size)]).collect());
            }
            class_of[p] = id;
        }
        Ok(FlatInverse { nz, bordered, inverses, class_of, weights: cheb.w.clone() })
    }

    /// Apply to a residual laid out like the unknowns (optionally bordered).
    pub fn apply(&self, grid: &Fourier2, r: &[f64]) -> Vec<f64> {
        let nz = self.nz;
        let np = grid.np();
        let hat = grid.forward(&r[..nz * np]);
        let mut out = vec![C64::new(0.0, 0.0); nz * np];
        let mut col = vec![C64::new(0.0, 0.0); nz + 1];
        let mut lambda = 0.0;
        for p in 0..np {
            let inv = &self.inverses[self.class_of[p]];
            let size = if inv.len() == nz * nz { nz } else { nz + 1 };
            for kz in 0..nz {
                col[kz] = hat[kz * np + p];
            }
            if size > nz {
                // Mode zero in mean variables; the border row is real.
                for c in col.iter_mut().take(nz) {
                    *c /= np as f64;
                }
                col[nz] = C64::new(r[nz * np], 0.0);
            }
            for row in 0..size {
                let mut acc = C64::new(0.0, 0.0);
                for q in 0..size {
                    acc += col[q] * inv[row * size + q];
                }
                if row < nz {
                    out[row * np + p] = if size > nz { acc * np as f64 } else { acc };
                } else {
                    lambda = acc.re;
                }
            }
        }
        let mut x = grid.inverse(out);
        if self.bordered {
            x.push(lambda);
        }
        x
    }

    pub fn bordered(&self) -> bool {
        self.bordered
    }

    pub(crate) fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Apply the discrete boundary value operator.
pub(crate) fn apply_operator(grid: &BulkGrid, iface: BcKind, wall: BcKind, bordered: bool, x: &[f64], w: &[f64]) -> Vec<f64> {
    let np = grid.np();
    let n = grid.len();
    let f = &x[..n];
    let d = grid.derivs(f);
    let mut y = grid.laplacian_from(&d);
    if bordered {
        let lam = x[n];
        y.iter_mut().for_each(|a| *a += lam);
    }
    let ip = grid.interface_plane();
    let wp = grid.wall_plane();
    for p in 0..np {
        let i = ip * np + p;
        y[i] = match iface {
            BcKind::Dirichlet => f[i],
            BcKind::Neumann => {
                let nv = grid.interface_outward(p);
                (0..3)
                    .map(|a| nv[a] * (grid.jinv[a][i] * d.d1[0][i] + grid.jinv[3 + a][i] * d.d1[1][i] + grid.jinv[6 + a][i] * d.d1[2][i]))
                    .sum()
            }
        };
        let i = wp * np + p;
        y[i] = match wall {
            BcKind::Dirichlet => f[i],
            BcKind::Neumann => {
                grid.side.wall_z() * (grid.jinv[2][i] * d.d1[0][i] + grid.jinv[5][i] * d.d1[1][i] + grid.jinv[8][i] * d.d1[2][i])
            }
        };
    }
    if bordered {
        let mut c = 0.0;
        for kz in 0..grid.nz {
            let s: f64 = f[kz * np..(kz + 1) * np].iter().sum();
            c += w[kz] * s / np as f64;
        }
        y.push(c);
    }
    y
}

/// Solve `Δf = source` with the given boundary data.
pub fn solve_with(
    grid: &BulkGrid,
    precond: &FlatInverse,
    source: &[f64],
    iface: &Bc,
    wall: &Bc,
    opts: SolverOptions,
) -> Result<EllipticSolution> {
    let np = grid.np();
    let n = grid.len();
    crate::error::ensure_finite("elliptic source", source)?;
    crate::error::ensure_finite("boundary data", iface.data())?;
    crate::error::ensure_finite("boundary data", wall.data())?;
    let bordered = precond.bordered();
    let mut b = source.to_vec();
    let ip = grid.interface_plane();
    let wp = grid.wall_plane();
    b[ip * np..(ip + 1) * np].copy_from_slice(iface.data());
    b[wp * np..(wp + 1) * np].copy_from_slice(wall.data());
    if bordered {
        b.push(0.0);
    }
    let (ik, wk) = (iface.kind(), wall.kind());
    let w = precond.weights().to_vec();
    let (x, rep) = gmres(
        |v| apply_operator(grid, ik, wk, bordered, v, &w),
        |v| precond.apply(&grid.grid, v),
        &b,
        opts,
    );
    if !rep.converged {
        return Err(PilError::EllipticNoConverge { iterations: rep.iterations, residual: rep.residual });
    }
    let defect = if bordered { x[n] } else { 0.0 };
    let mut values = x;
    values.truncate(n);
    Ok(EllipticSolution { values, iterations: rep.iterations, residual: rep.residual, defect })
}
