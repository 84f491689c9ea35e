//! Vacuum magnetic field `ĥ = c + ∇ψ` below the interface.
//!
//! On the bottom wall `ñ₋ = -e_z`, so `ñ₋ × ĥ = (ĥ_y, -ĥ_x, 0)` and the
//! surface current fixes the tangential trace `(ĥ_x, ĥ_y) = (-Ĵ₂, Ĵ₁)`.
//! Its mean is the constant `c`; the fluctuation is the tangential gradient
//! of the Dirichlet trace of `ψ`.

use super::interface_trace3;
use crate::error::{ensure_finite, PilError, Result};
use crate::harmonic::{Bc, BulkField, BulkGrid, Side, Slab};
use crate::spectral::{max_abs, Fourier2, C64};
use crate::surface::{surface_integral, SurfaceGeometry};

/// Tangential current `Ĵ = (Ĵ₁, Ĵ₂)` on the bottom wall.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceCurrent {
    pub j: [Vec<f64>; 2],
}

impl SurfaceCurrent {
    pub fn new(grid: &Fourier2, j1: Vec<f64>, j2: Vec<f64>) -> Result<Self> {
        ensure_finite("surface current", &j1)?;
        ensure_finite("surface current", &j2)?;
        if j1.len() != grid.np() || j2.len() != grid.np() {
            return Err(PilError::validation("current", "length does not match the grid"));
        }
        Ok(SurfaceCurrent { j: [j1, j2] })
    }

    pub fn zeros(grid: &Fourier2) -> Self {
        SurfaceCurrent { j: [vec![0.0; grid.np()], vec![0.0; grid.np()]] }
    }

    pub fn constant(grid: &Fourier2, j: [f64; 2]) -> Self {
        SurfaceCurrent { j: [vec![j[0]; grid.np()], vec![j[1]; grid.np()]] }
    }

    pub fn scaled(&self, c: f64) -> Self {
        SurfaceCurrent { j: [self.j[0].iter().map(|x| c * x).collect(), self.j[1].iter().map(|x| c * x).collect()] }
    }

    /// `Div_{T²} Ĵ`.
    pub fn divergence(&self, grid: &Fourier2) -> Vec<f64> {
        let a = grid.diff(&self.j[0], 1, 0);
        let b = grid.diff(&self.j[1], 0, 1);
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    /// Reject currents whose divergence exceeds `tol` relative to their size.
    pub fn check(&self, grid: &Fourier2, tol: f64) -> Result<()> {
        let d = max_abs(&self.divergence(grid));
        let scale = 1.0 + max_abs(&self.j[0]).max(max_abs(&self.j[1]));
        if d > tol * scale {
            return Err(PilError::IncompatibleData { detail: format!("surface current has divergence {d:.3e}") });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VacuumReport {
    /// Surface mean removed from the normal data on `Γ_t`.
    pub normal_mean_removed: f64,
    pub iterations: usize,
}

/// Harmonic `ĥ` with `ĥ·n = θ` on `Γ_t` and tangential trace from `Ĵ`.
fn harmonic_vacuum(slab: &Slab, grid: &BulkGrid, j: &SurfaceCurrent, theta: &[f64]) -> Result<(BulkField, usize)> {
    if grid.side != Side::Minus {
        return Err(PilError::validation("grid", "vacuum field needs the minus-side grid"));
    }
    let f = &grid.grid;
    let np = f.np();
    let n = grid.len();
    let tx: Vec<f64> = j.j[1].iter().map(|x| -x).collect();
    let ty = j.j[0].clone();
    let c = [f.mean(&tx), f.mean(&ty)];
    // ∇g = (tx - c₀, ty - c₁) ⇒ ĝ = -i k·ŵ / |k|².
    let wx = f.forward(&tx);
    let wy = f.forward(&ty);
    let mut ghat = vec![C64::new(0.0, 0.0); np];
    for p in 0..np {
        let (i, jj) = (p / f.nv, p % f.nv);
        let (ku, kv) = (f.ku(i), f.kv(jj));
        let k2 = ku * ku + kv * kv;
        let sx = if f.is_nyquist_u(i) { 0.0 } else { ku };
        let sy = if f.is_nyquist_v(jj) { 0.0 } else { kv };
        if k2 > 0.0 {
            ghat[p] = C64::new(0.0, -1.0) * (wx[p] * sx + wy[p] * sy) / k2;
        }
    }
    let g = f.inverse(ghat);
    let iface: Vec<f64> = (0..np)
        .map(|p| {
            let cn = c[0] * grid.interface_normal[0][p] + c[1] * grid.interface_normal[1][p];
            cn - theta[p]
        })
        .collect();
    let psi = slab.solve(grid, &vec![0.0; n], &Bc::Neumann(iface), &Bc::Dirichlet(g))?;
    let mut h = grid.grad(&psi.values);
    for a in 0..2 {
        h[a].iter_mut().for_each(|x| *x += c[a]);
    }
    Ok((BulkField::vector(Side::Minus, h), psi.iterations))
}

/// `div ĥ = 0`, `curl ĥ = 0`, `ĥ·n = 0` on `Γ_t`, `ñ₋ × ĥ = Ĵ` on `Γ₋`.
pub fn solve_vacuum_field(slab: &Slab, grid: &BulkGrid, j: &SurfaceCurrent) -> Result<BulkField> {
    j.check(&grid.grid, 1e-8)?;
    let np = grid.np();
    Ok(harmonic_vacuum(slab, grid, j, &vec![0.0; np])?.0)
}

/// `n·(D_ĥ v - D_v ĥ)` on `Γ_t`, with `∇v` from the plasma grid and `∇ĥ`
/// from the vacuum grid.
pub fn vacuum_normal_rate(plus: &BulkGrid, minus: &BulkGrid, v: [&[f64]; 3], hhat: [&[f64]; 3]) -> Vec<f64> {
    let np = plus.np();
    let op = plus.interface_plane() * np;
    let om = minus.interface_plane() * np;
    let vt = interface_trace3(plus, v);
    let ht = interface_trace3(minus, hhat);
    let gv: Vec<[Vec<f64>; 3]> = v.iter().map(|c| plus.grad(c)).collect();
    let gh: Vec<[Vec<f64>; 3]> = hhat.iter().map(|c| minus.grad(c)).collect();
    (0..np)
        .map(|p| {
            let mut acc = 0.0;
            for b in 0..3 {
                let dhv: f64 = (0..3).map(|a| ht[a][p] * gv[b][a][op + p]).sum();
                let dvh: f64 = (0..3).map(|a| vt[a][p] * gh[b][a][om + p]).sum();
                acc += plus.interface_normal[b][p] * (dhv - dvh);
            }
            acc
        })
        .collect()
}

/// `∂tĥ` from the normal rate on `Γ_t` and `∂tĴ`. The surface mean of the
/// normal rate vanishes for exact data; its discrete value is removed and
/// reported.
pub fn solve_time_derivative_vacuum(
    slab: &Slab,
    plus: &BulkGrid,
    minus: &BulkGrid,
    geom: &SurfaceGeometry,
    v: [&[f64]; 3],
    hhat: [&[f64]; 3],
    dj: &SurfaceCurrent,
) -> Result<(BulkField, VacuumReport)> {
    dj.check(&minus.grid, 1e-8)?;
    let mut theta = vacuum_normal_rate(plus, minus, v, hhat);
    let mean = surface_integral(geom, &theta) / geom.area();
    theta.iter_mut().for_each(|x| *x -= mean);
    let (field, iterations) = harmonic_vacuum(slab, minus, dj, &theta)?;
    Ok((field, VacuumReport { normal_mean_removed: mean, iterations }))
}
