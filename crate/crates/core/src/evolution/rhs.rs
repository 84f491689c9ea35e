use super::{Frame, Problem};
use crate::error::{PilError, Result};
use crate::fields::{interface_dot_normal, pressure_total, wall_flux, Fluxes};
use crate::harmonic::{Bc, BulkGrid, Side, Slab};

/// `∂tγ = (v·n)/(ν·n)` on `Γ_t`; fails when `min ν·n < 0.5`.
pub fn kinematic_rhs(slab: &Slab, frame: &Frame, v: [&[f64]; 3]) -> Result<Vec<f64>> {
    let nu = &slab.reference.nu;
    let n = &frame.geom.normal;
    let vn = interface_dot_normal(&frame.plus, v);
    let np = vn.len();
    let mut min_dot = f64::INFINITY;
    let out = (0..np)
        .map(|p| {
            let d = nu[0][p] * n[0][p] + nu[1][p] * n[1][p] + nu[2][p] * n[2][p];
            min_dot = min_dot.min(d);
            vn[p] / d
        })
        .collect();
    if !(min_dot >= 0.5) {
        return Err(PilError::TransversalityLoss { min_dot });
    }
    Ok(out)
}

/// Velocity of the harmonic-coordinate grid points when `γ` moves at rate
/// `γ̇`: the harmonic extension of `γ̇ν` over the reference slab, zero on
/// the wall.
pub fn grid_velocity(slab: &Slab, side: Side, gamma_dot: &[f64]) -> Result<[Vec<f64>; 3]> {
    let rg = slab.reference_grid(side);
    let np = rg.np();
    let n = rg.len();
    let nu = &slab.reference.nu;
    let zero = Bc::Dirichlet(vec![0.0; np]);
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    for k in 0..3 {
        let data: Vec<f64> = (0..np).map(|p| gamma_dot[p] * nu[k][p]).collect();
        if data.iter().all(|x| *x == 0.0) {
            continue;
        }
        out[k] = slab.solve(rg, &vec![0.0; n], &Bc::Dirichlet(data), &zero)?.values;
    }
    Ok(out)
}

/// Bulk tendencies on the plasma grid.
#[derive(Clone, Debug)]
pub struct BulkTendency {
    /// `d v/dt` at fixed computational coordinates.
    pub dv: [Vec<f64>; 3],
    pub dh: [Vec<f64>; 3],
    /// Eulerian `∂t v = -(v·∇)v - ∇p + (h·∇)h`.
    pub ev: [Vec<f64>; 3],
    /// Eulerian `∂t h = -(v·∇)h + (h·∇)v`.
    pub eh: [Vec<f64>; 3],
    pub p: Vec<f64>,
}

/// Pressure and bulk tendencies; `w` is the grid velocity on the plasma grid.
pub fn bulk_rhs(problem: &Problem, frame: &Frame, v: [&[f64]; 3], h: [&[f64]; 3], w: [&[f64]; 3]) -> Result<BulkTendency> {
    let grid = &frame.plus;
    let p = pressure_total(&problem.slab, grid, &frame.geom, v, h, &frame.hhat_trace, problem.alpha)?;
    let n = grid.len();
    // gv[b][a] = ∂_a v_b
    let gv: Vec<[Vec<f64>; 3]> = v.iter().map(|c| grid.grad(c)).collect();
    let gh: Vec<[Vec<f64>; 3]> = h.iter().map(|c| grid.grad(c)).collect();
    let gp = grid.grad(&p);
    let along = |a: [&[f64]; 3], g: &[Vec<f64>; 3], i: usize| a[0][i] * g[0][i] + a[1][i] * g[1][i] + a[2][i] * g[2][i];
    let mut ev: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    let mut eh = ev.clone();
    let mut dv = ev.clone();
    let mut dh = ev.clone();
    for b in 0..3 {
        for i in 0..n {
            let vv = along(v, &gv[b], i);
            let hh = along(h, &gh[b], i);
            let vh = along(v, &gh[b], i);
            let hv = along(h, &gv[b], i);
            ev[b][i] = -vv - gp[b][i] + hh;
            eh[b][i] = -vh + hv;
            dv[b][i] = ev[b][i] + along(w, &gv[b], i);
            dh[b][i] = eh[b][i] + along(w, &gh[b], i);
        }
    }
    Ok(BulkTendency { dv, dh, ev, eh, p })
}

/// `∂t𝔳`, `∂t𝔥`: wall integrals of the Eulerian tendencies.
pub fn flux_rhs(grid: &BulkGrid, tend: &BulkTendency) -> Fluxes {
    let r = |x: &[Vec<f64>; 3]| wall_flux(grid, [&x[0], &x[1], &x[2]]);
    Fluxes { v: r(&tend.ev), h: r(&tend.eh) }
}

/// Elsässer vorticities `ξ = ω - j`, `η = ω + j` and their Eulerian rates
/// `∂tξ = -(u₊·∇)ξ + (ξ·∇)u₊ + 2tr(∇v×∇h)`,
/// `∂tη = -(u₋·∇)η + (η·∇)u₋ - 2tr(∇v×∇h)`, `u± = v ± h`.
#[derive(Clone, Debug)]
pub struct TransportTendency {
    pub xi: [Vec<f64>; 3],
    pub eta: [Vec<f64>; 3],
    pub dxi: [Vec<f64>; 3],
    pub deta: [Vec<f64>; 3],
}

pub fn transport_rhs(grid: &BulkGrid, v: [&[f64]; 3], h: [&[f64]; 3]) -> TransportTendency {
    let n = grid.len();
    let comb = |s: f64| -> [Vec<f64>; 3] { std::array::from_fn(|a| (0..n).map(|i| v[a][i] + s * h[a][i]).collect()) };
    let up = comb(1.0);
    let um = comb(-1.0);
    let omega = grid.curl(v);
    let j = grid.curl(h);
    let xi: [Vec<f64>; 3] = std::array::from_fn(|a| (0..n).map(|i| omega[a][i] - j[a][i]).collect());
    let eta: [Vec<f64>; 3] = std::array::from_fn(|a| (0..n).map(|i| omega[a][i] + j[a][i]).collect());
    // Σ_l ∇v_l × ∇h_l
    let gv: Vec<[Vec<f64>; 3]> = v.iter().map(|c| grid.grad(c)).collect();
    let gh: Vec<[Vec<f64>; 3]> = h.iter().map(|c| grid.grad(c)).collect();
    let mut tr: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    for l in 0..3 {
        for i in 0..n {
            let a = [gv[l][0][i], gv[l][1][i], gv[l][2][i]];
            let b = [gh[l][0][i], gh[l][1][i], gh[l][2][i]];
            tr[0][i] += a[1] * b[2] - a[2] * b[1];
            tr[1][i] += a[2] * b[0] - a[0] * b[2];
            tr[2][i] += a[0] * b[1] - a[1] * b[0];
        }
    }
    let rate = |z: &[Vec<f64>; 3], u: &[Vec<f64>; 3], s: f64| -> [Vec<f64>; 3] {
        let adv = grid.advect(refs(u), refs(z));
        let str_ = grid.advect(refs(z), refs(u));
        std::array::from_fn(|a| (0..n).map(|i| -adv[a][i] + str_[a][i] + 2.0 * s * tr[a][i]).collect())
    };
    let dxi = rate(&xi, &up, 1.0);
    let deta = rate(&eta, &um, -1.0);
    TransportTendency { xi, eta, dxi, deta }
}

fn refs(x: &[Vec<f64>; 3]) -> [&[f64]; 3] {
    [&x[0], &x[1], &x[2]]
}
