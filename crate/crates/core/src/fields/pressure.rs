//! Pressure and its parts on the plasma side.
//!
//! The total pressure solves `-Δp = tr(DvDv) - tr(DhDh)` with
//! `p = α²κ + ½|ĥ|²` on `Γ_t` and `∂_z p = 0` on the flat wall. Its parts
//! `p_vv`, `p_hh` (zero Dirichlet), `p̂ = H₊(½|ĥ|²)` and `α²H₊κ` add up to it
//! by linearity.

use super::interface_dot_normal;
use crate::error::{PilError, Result};
use crate::harmonic::{Bc, BulkField, BulkGrid, Side, Slab};
use crate::surface::{SurfaceGeometry, Vec3Field};

/// `tr(Da·Db) = Σ ∂_i a_j ∂_j b_i`.
pub fn trace_product(grid: &BulkGrid, a: [&[f64]; 3], b: [&[f64]; 3]) -> Vec<f64> {
    let ga: Vec<[Vec<f64>; 3]> = a.iter().map(|c| grid.grad(c)).collect();
    let same = a.iter().zip(&b).all(|(x, y)| std::ptr::eq(*x, *y));
    let gb: Vec<[Vec<f64>; 3]> = if same { ga.clone() } else { b.iter().map(|c| grid.grad(c)).collect() };
    (0..grid.len())
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    // ga[j][i] = ∂_i a_j
                    acc += ga[j][i][k] * gb[i][j][k];
                }
            }
            acc
        })
        .collect()
}

/// Pressure parts on the plasma grid.
#[derive(Clone, Debug)]
pub struct PressureParts {
    pub p_vv: Vec<f64>,
    pub p_hh: Vec<f64>,
    /// `H₊(½|ĥ|²)`.
    pub p_hat: Vec<f64>,
    /// `α²H₊κ`.
    pub p_kappa: Vec<f64>,
    /// `p_vv - p_hh`.
    pub q: Vec<f64>,
    pub p_total: Vec<f64>,
    /// Interface trace of `p_total`.
    pub trace: Vec<f64>,
}

fn half_square(t: &Vec3Field) -> Vec<f64> {
    (0..t[0].len()).map(|p| 0.5 * (t[0][p].powi(2) + t[1][p].powi(2) + t[2][p].powi(2))).collect()
}

fn check_plus(grid: &BulkGrid) -> Result<()> {
    if grid.side != Side::Plus {
        return Err(PilError::validation("grid", "pressure lives on the plus-side grid"));
    }
    Ok(())
}

/// All parts, one elliptic solve each.
pub fn pressure_decomposition(
    slab: &Slab,
    grid: &BulkGrid,
    geom: &SurfaceGeometry,
    v: [&[f64]; 3],
    h: [&[f64]; 3],
    hhat_trace: &Vec3Field,
    alpha: f64,
) -> Result<PressureParts> {
    check_plus(grid)?;
    let np = grid.np();
    let zero = vec![0.0; np];
    let wall = Bc::zero_neumann(np);
    let solve = |src: Vec<f64>, dir: Vec<f64>| -> Result<Vec<f64>> {
        Ok(slab.solve(grid, &src, &Bc::Dirichlet(dir), &wall)?.values)
    };
    let neg = |x: Vec<f64>| -> Vec<f64> { x.into_iter().map(|a| -a).collect() };
    let p_vv = solve(neg(trace_product(grid, v, v)), zero.clone())?;
    let p_hh = solve(neg(trace_product(grid, h, h)), zero.clone())?;
    let n = grid.len();
    let p_hat = solve(vec![0.0; n], half_square(hhat_trace))?;
    let a2 = alpha * alpha;
    let p_kappa = solve(vec![0.0; n], geom.kappa.iter().map(|k| a2 * k).collect())?;
    let q: Vec<f64> = p_vv.iter().zip(&p_hh).map(|(a, b)| a - b).collect();
    let p_total: Vec<f64> = (0..n).map(|i| q[i] + p_kappa[i] + p_hat[i]).collect();
    let trace = grid.interface_trace(&p_total);
    Ok(PressureParts { p_vv, p_hh, p_hat, p_kappa, q, p_total, trace })
}

/// Total pressure in a single solve.
pub fn pressure_total(
    slab: &Slab,
    grid: &BulkGrid,
    geom: &SurfaceGeometry,
    v: [&[f64]; 3],
    h: [&[f64]; 3],
    hhat_trace: &Vec3Field,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_plus(grid)?;
    let np = grid.np();
    let tv = trace_product(grid, v, v);
    let th = trace_product(grid, h, h);
    let src: Vec<f64> = tv.iter().zip(&th).map(|(a, b)| b - a).collect();
    let hs = half_square(hhat_trace);
    let a2 = alpha * alpha;
    let dir: Vec<f64> = (0..np).map(|p| a2 * geom.kappa[p] + hs[p]).collect();
    Ok(slab.solve(grid, &src, &Bc::Dirichlet(dir), &Bc::zero_neumann(np))?.values)
}

/// `W = D_t v - D_h h + ∇p` and its normal trace on `Γ_t`.
#[derive(Clone, Debug)]
pub struct WResidual {
    pub w: BulkField,
    pub theta: Vec<f64>,
}

impl WResidual {
    pub fn max_abs(&self) -> f64 {
        self.w.max_norm()
    }
}

/// `dtv` is the material derivative `∂t v + (v·∇)v` on the grid.
pub fn w_residual(grid: &BulkGrid, p_total: &[f64], h: [&[f64]; 3], dtv: [&[f64]; 3]) -> WResidual {
    let n = grid.len();
    let hh = grid.advect(h, h);
    let gp = grid.grad(p_total);
    let w: [Vec<f64>; 3] = std::array::from_fn(|a| (0..n).map(|i| dtv[a][i] - hh[a][i] + gp[a][i]).collect());
    let theta = interface_dot_normal(grid, [&w[0], &w[1], &w[2]]);
    WResidual { w: BulkField::vector(grid.side, w), theta }
}

/// `𝔱 = -∇_n p` on `Γ_t` for the supplied plasma pressure.
pub fn rt_indicator(grid: &BulkGrid, p: &[f64]) -> Vec<f64> {
    grid.interface_n_derivative(p).into_iter().map(|x| -x).collect()
}
