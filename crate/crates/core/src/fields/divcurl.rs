//! Div-curl recovery on the plasma side and Leray projection.

use super::{interface_dot_normal, wall_flux};
use crate::error::{PilError, Result};
use crate::harmonic::{Bc, BulkField, BulkGrid, Side, Slab};
use crate::surface::{surface_integral, SurfaceGeometry};

/// Plane where the axial-gauge integration starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeStart {
    Wall,
    Interface,
}

/// Particular solution `w₀` of `curl w₀ = f` in the axial gauge.
///
/// In computational coordinates the covariant components `ũ = Jᵀw₀` satisfy
/// `curl_ξ ũ = det J · J⁻¹ f`. With `ũ_s = 0` the two horizontal components
/// follow by integration in `s`; the starting plane needs a 2-D solve whose
/// data must be mean-free (the flux of `f` through that plane). Returns the
/// field and the removed mean.
pub fn curl_particular(grid: &BulkGrid, f: [&[f64]; 3], start: GaugeStart) -> ([Vec<f64>; 3], f64) {
    let n = grid.len();
    let np = grid.np();
    let nz = grid.nz;
    // F̃^m = det J Σ_a (∂ξ^m/∂x_a) f_a
    let ft: [Vec<f64>; 3] = std::array::from_fn(|m| {
        (0..n)
            .map(|i| grid.jdet[i] * (0..3).map(|a| grid.jinv[3 * m + a][i] * f[a][i]).sum::<f64>())
            .collect()
    });
    let plane = match start {
        GaugeStart::Wall => grid.wall_plane(),
        GaugeStart::Interface => grid.interface_plane(),
    };
    let integrate = |g: &[f64]| -> Vec<f64> {
        let q = grid.cheb.apply_planes(&grid.cheb.int_from_bottom, g, np);
        let mut out = q.clone();
        for k in 0..nz {
            for p in 0..np {
                out[k * np + p] = q[k * np + p] - q[plane * np + p];
            }
        }
        out
    };
    let iv = integrate(&ft[1]);
    let iu = integrate(&ft[0]);
    // 2-D potential on the starting plane: Δβ = F̃_s - mean.
    let fs = grid.plane(&ft[2], plane).to_vec();
    let mean = grid.grid.mean(&fs);
    let hat = grid.grid.forward(&fs);
    let beta_hat = grid.grid.apply_symbol(&hat, |i, j| {
        let k2 = grid.grid.ku(i).powi(2) + grid.grid.kv(j).powi(2);
        if k2 == 0.0 {
            0.0.into()
        } else {
            (-1.0 / k2).into()
        }
    });
    let beta = grid.grid.inverse(beta_hat);
    let (bu, bv) = grid.grid.grad(&beta);
    let mut ut = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for k in 0..nz {
        for p in 0..np {
            let i = k * np + p;
            ut[0][i] = -bv[p] + iv[i];
            ut[1][i] = bu[p] - iu[i];
        }
    }
    // w₀ = J^{-T} ũ
    let w = std::array::from_fn(|a| {
        (0..n)
            .map(|i| grid.jinv[a][i] * ut[0][i] + grid.jinv[3 + a][i] * ut[1][i] + grid.jinv[6 + a][i] * ut[2][i])
            .collect()
    });
    (w, mean)
}

/// Data of the plasma-side div-curl problem.
#[derive(Clone, Copy, Debug)]
pub struct DivCurlData<'a> {
    pub curl: [&'a [f64]; 3],
    pub div: &'a [f64],
    /// `u·n` on `Γ_t`.
    pub normal_trace: &'a [f64],
    /// `∫_{Γ+} u dS` (horizontal components).
    pub flux: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivCurlReport {
    /// Coefficients of the harmonic flux fields.
    pub flux_coeffs: [f64; 2],
    /// Mean removed on the gauge starting plane.
    pub start_flux: f64,
    /// Lagrange defect of the scalar potential solve.
    pub potential_defect: f64,
}

/// `curl u = f`, `div u = g`, `u·n = θ` on `Γ_t`, `u_z = 0` and
/// `∫_{Γ+} u dS = 𝔲` on the top wall.
pub fn solve_divcurl_plus(
    slab: &Slab,
    grid: &BulkGrid,
    geom: &SurfaceGeometry,
    data: DivCurlData<'_>,
    start: GaugeStart,
) -> Result<(BulkField, DivCurlReport)> {
    if grid.side != Side::Plus {
        return Err(PilError::validation("grid", "plasma div-curl needs the plus-side grid"));
    }
    let np = grid.np();
    let n = grid.len();
    let int_g = grid.integrate(data.div);
    let int_t = surface_integral(geom, data.normal_trace);
    let scale = 1.0 + grid.integrate(&data.div.iter().map(|x| x.abs()).collect::<Vec<_>>())
        + surface_integral(geom, &data.normal_trace.iter().map(|x| x.abs()).collect::<Vec<_>>());
    if (int_g - int_t).abs() > 1e-8 * scale {
        return Err(PilError::IncompatibleData {
            detail: format!("∫div = {int_g:.6e} but ∫θ dS = {int_t:.6e}"),
        });
    }
    let (w0, start_flux) = curl_particular(grid, data.curl, start);
    let fscale = 1.0 + data.curl.iter().map(|c| crate::spectral::max_abs(c)).fold(0.0, f64::max);
    if start_flux.abs() > 1e-8 * fscale * 4.0 * std::f64::consts::PI.powi(2) {
        return Err(PilError::IncompatibleData { detail: format!("curl data carries flux {start_flux:.3e} through the wall") });
    }
    let divw = grid.div([&w0[0], &w0[1], &w0[2]]);
    let source: Vec<f64> = (0..n).map(|i| data.div[i] - divw[i]).collect();
    let wn = interface_dot_normal(grid, [&w0[0], &w0[1], &w0[2]]);
    let iface: Vec<f64> = (0..np).map(|p| data.normal_trace[p] - wn[p]).collect();
    let wp = grid.wall_plane();
    let wall: Vec<f64> = (0..np).map(|p| -w0[2][wp * np + p]).collect();
    let phi = slab.solve(grid, &source, &Bc::Neumann(iface), &Bc::Neumann(wall))?;
    let gphi = grid.grad(&phi.values);
    let mut u: [Vec<f64>; 3] = std::array::from_fn(|a| (0..n).map(|i| w0[a][i] + gphi[a][i]).collect());

    // Harmonic flux fields e_i + ∇χ_i.
    let mut basis: Vec<[Vec<f64>; 3]> = Vec::with_capacity(2);
    for e in 0..2 {
        let data: Vec<f64> = (0..np).map(|p| -geom.normal[e][p]).collect();
        let mut field: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        field[e] = vec![1.0; n];
        if data.iter().any(|x| *x != 0.0) {
            let chi = slab.solve(grid, &vec![0.0; n], &Bc::Neumann(data), &Bc::zero_neumann(np))?;
            let g = grid.grad(&chi.values);
            for a in 0..3 {
                for i in 0..n {
                    field[a][i] += g[a][i];
                }
            }
        }
        basis.push(field);
    }
    let current = wall_flux(grid, [&u[0], &u[1], &u[2]]);
    let m: Vec<[f64; 2]> = basis.iter().map(|b| wall_flux(grid, [&b[0], &b[1], &b[2]])).collect();
    let rhs = [data.flux[0] - current[0], data.flux[1] - current[1]];
    // m[j][i] = ∫ (basis_j)_i
    let det = m[0][0] * m[1][1] - m[1][0] * m[0][1];
    let c = [(rhs[0] * m[1][1] - rhs[1] * m[1][0]) / det, (m[0][0] * rhs[1] - m[0][1] * rhs[0]) / det];
    for (cj, b) in c.iter().zip(&basis) {
        for a in 0..3 {
            for i in 0..n {
                u[a][i] += cj * b[a][i];
            }
        }
    }
    Ok((BulkField::vector(Side::Plus, u), DivCurlReport { flux_coeffs: c, start_flux, potential_defect: phi.defect }))
}

/// Remove the gradient part of `u` so that `div u = 0`,
/// `u·n = target` on `Γ_t` and `u·e_z = 0` on the wall. The target's surface
/// mean is removed first; that correction is returned with the result.
pub fn leray_project(slab: &Slab, grid: &BulkGrid, geom: &SurfaceGeometry, u: [&[f64]; 3], target: &[f64]) -> Result<([Vec<f64>; 3], f64)> {
    let np = grid.np();
    let n = grid.len();
    let correction = surface_integral(geom, target) / geom.area();
    let un = interface_dot_normal(grid, u);
    let sgn = grid.side.outward_sign();
    let iface: Vec<f64> = (0..np).map(|p| sgn * (un[p] - (target[p] - correction))).collect();
    let wp = grid.wall_plane();
    let wall: Vec<f64> = (0..np).map(|p| grid.side.wall_z() * u[2][wp * np + p]).collect();
    let div = grid.div(u);
    let phi = slab.solve(grid, &div, &Bc::Neumann(iface), &Bc::Neumann(wall))?;
    let g = grid.grad(&phi.values);
    let out = std::array::from_fn(|a| (0..n).map(|i| u[a][i] - g[a][i]).collect());
    Ok((out, correction))
}
