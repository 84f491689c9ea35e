//! Residuals of the first- and second-order evolution identities for the
//! mean curvature along a trajectory window.
//!
//! Surface quantities are sampled at fixed chart points `p`, which move with
//! `Φ(p, t)`. The particle path differs from the chart path by the tangential
//! velocity `W = v - γ̇ν`, so with `F(p, t) = f(Φ(p, t), t)` and chart
//! components `W^i`:
//! `D_t f = ∂_t F + W^i ∂_i F`,
//! `D_t² f = ∂_tt F + (∂_t W^i) ∂_i F + 2 W^i ∂_i ∂_t F + W^j ∂_j (W^i ∂_i F)`.
//! Time derivatives use five-point centered stencils.

use crate::error::{PilError, Result};
use crate::evolution::{Filter, Frame, Problem, SimState};
use crate::fields::{interface_trace3, pressure_decomposition};
use crate::spectral::{max_abs, Fourier2};
use crate::surface::{
    build_geometry, codazzi_normal_residual, laplace_beltrami, shape_operator, simons_residual, surface_gradient,
    surface_integral, tangential_projector, SurfaceGeometry, Vec3Field,
};

/// Residuals of the geometric and evolution identities on one window.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidualReport {
    pub simons: f64,
    pub lap_n: f64,
    /// `d/dt area - ∫κθ dS`.
    pub ds_transport: f64,
    /// Grid max of `D_tκ + n·Δ_Γ v + 2⟨II, A⟩`.
    pub kappa_first_order: f64,
    /// Grid max of `D_t²κ` minus the explicit term set.
    pub kappa_second_order: f64,
    /// Grid max of `D_t²κ` itself, for scale.
    pub kappa_second_lhs: f64,
    /// Optional windowed energy budget residual.
    pub energy_budget: Option<f64>,
    /// Grid max of each explicit second-order term.
    pub second_order_terms: Vec<(&'static str, f64)>,
    pub resolution: [usize; 3],
    pub dt: f64,
    pub filtered: bool,
}

fn d1(f: [&[f64]; 5], dt: f64) -> Vec<f64> {
    (0..f[0].len()).map(|p| (f[0][p] - 8.0 * f[1][p] + 8.0 * f[3][p] - f[4][p]) / (12.0 * dt)).collect()
}

fn d2(f: [&[f64]; 5], dt: f64) -> Vec<f64> {
    (0..f[0].len())
        .map(|p| (-f[0][p] + 16.0 * f[1][p] - 30.0 * f[2][p] + 16.0 * f[3][p] - f[4][p]) / (12.0 * dt * dt))
        .collect()
}

/// `W^i ∂_i f` for chart components `w`.
fn chart_advect(grid: &Fourier2, w: &[Vec<f64>; 2], f: &[f64]) -> Vec<f64> {
    let (fu, fv) = grid.grad(f);
    (0..f.len()).map(|p| w[0][p] * fu[p] + w[1][p] * fv[p]).collect()
}

/// Chart components of the tangential velocity `W = v - γ̇ν` of the particle
/// path relative to the chart point.
fn chart_velocity(problem: &Problem, geom: &SurfaceGeometry, v: &Vec3Field) -> Result<[Vec<f64>; 2]> {
    let nu = &problem.slab.reference.nu;
    let np = geom.grid.np();
    let mut wu = vec![0.0; np];
    let mut wv = vec![0.0; np];
    for p in 0..np {
        let n = geom.normal_at(p);
        let vn = v[0][p] * n[0] + v[1][p] * n[1] + v[2][p] * n[2];
        let nun = nu[0][p] * n[0] + nu[1][p] * n[1] + nu[2][p] * n[2];
        if !(nun >= 0.5) {
            return Err(PilError::TransversalityLoss { min_dot: nun });
        }
        let gd = vn / nun;
        let w: [f64; 3] = std::array::from_fn(|k| v[k][p] - gd * nu[k][p]);
        let a = w[0] * geom.tu[0][p] + w[1] * geom.tu[1][p] + w[2] * geom.tu[2][p];
        let b = w[0] * geom.tv[0][p] + w[1] * geom.tv[1][p] + w[2] * geom.tv[2][p];
        let gi = &geom.metric_inv;
        wu[p] = gi[0][p] * a + gi[1][p] * b;
        wv[p] = gi[1][p] * a + gi[2][p] * b;
    }
    Ok([wu, wv])
}

fn interface_values(state: &SimState, np: usize, nz: usize) -> (Vec3Field, Vec3Field) {
    // The interface is plane nz-1 of the plasma grid.
    let off = (nz - 1) * np;
    let v = std::array::from_fn(|a| state.v[a][off..off + np].to_vec());
    let h = std::array::from_fn(|a| state.h[a][off..off + np].to_vec());
    (v, h)
}

/// `∂^Γ_a u_b` as a row-major 3×3 field.
fn surface_jacobian(geom: &SurfaceGeometry, u: &Vec3Field) -> [Vec<f64>; 9] {
    let g: Vec<Vec3Field> = u.iter().map(|c| surface_gradient(geom, c)).collect();
    std::array::from_fn(|idx| g[idx % 3][idx / 3].clone())
}

/// `-n·Δ_Γ v - 2⟨II, A⟩` with `2A = (Dv)^⊤ + ((Dv)^⊤)*`.
pub fn kappa_rate_rhs(geom: &SurfaceGeometry, v: &Vec3Field) -> Vec<f64> {
    let np = geom.grid.np();
    let lap: Vec<Vec<f64>> = v.iter().map(|c| laplace_beltrami(geom, c)).collect();
    let s = shape_operator(geom);
    let g = surface_jacobian(geom, v);
    (0..np)
        .map(|p| {
            let n = geom.normal_at(p);
            let nl = n[0] * lap[0][p] + n[1] * lap[1][p] + n[2] * lap[2][p];
            // S is symmetric and tangential, so ⟨S, A⟩ = Σ S_ab G_ab.
            let sa: f64 = (0..9).map(|i| s[i][p] * g[i][p]).sum();
            -nl - 2.0 * sa
        })
        .collect()
}

fn dot3(a: &Vec3Field, b: &[Vec<f64>], p: usize) -> f64 {
    a[0][p] * b[0][p] + a[1][p] * b[1][p] + a[2][p] * b[2][p]
}

/// The explicit term set of the second-order identity at one time, each as
/// a grid function.
pub fn kappa_second_order_terms(problem: &Problem, state: &SimState, frame: &Frame) -> Result<Vec<(&'static str, Vec<f64>)>> {
    let geom = &frame.geom;
    let slab = &problem.slab;
    let np = geom.grid.np();
    let a2 = problem.alpha * problem.alpha;
    let kappa = &geom.kappa;
    let nk = slab.dn_apply(&frame.plus, kappa)?;
    let s = shape_operator(geom);
    let proj = tangential_projector(geom);
    let gk = surface_gradient(geom, kappa);
    let ht = interface_trace3(&frame.plus, state.h_ref());
    let hh = &frame.hhat_trace;
    let dd = |a: &Vec3Field| -> Vec<f64> {
        let first: Vec<f64> = (0..np).map(|p| dot3(a, &gk, p)).collect();
        let g2 = surface_gradient(geom, &first);
        (0..np).map(|p| dot3(a, &g2, p)).collect()
    };
    let lap_nk = laplace_beltrami(geom, &nk);
    let t1: Vec<f64> = lap_nk.iter().map(|x| a2 * x).collect();
    let t2: Vec<f64> = (0..np).map(|p| -a2 * dot3(&gk, &gk, p)).collect();
    let t3: Vec<f64> = (0..np).map(|p| a2 * (0..9).map(|i| s[i][p] * s[i][p]).sum::<f64>() * nk[p]).collect();
    let t4 = dd(&ht);
    let t5 = dd(hh);
    let parts = pressure_decomposition(slab, &frame.plus, geom, state.v_ref(), state.h_ref(), hh, problem.alpha)?;
    let pq: Vec<f64> = (0..parts.q.len()).map(|i| parts.q[i] + parts.p_hat[i]).collect();
    let dn_p = frame.plus.interface_n_derivative(&pq);
    let dn_hh = match (&frame.minus, frame.hhat_ref()) {
        (Some(minus), Some(h)) => {
            let half: Vec<f64> = (0..minus.len()).map(|i| 0.5 * (h[0][i].powi(2) + h[1][i].powi(2) + h[2][i].powi(2))).collect();
            minus.interface_n_derivative(&half)
        }
        _ => vec![0.0; np],
    };
    let t6: Vec<f64> = (0..np).map(|p| (dn_p[p] - dn_hh[p]) * nk[p]).collect();
    // 4⟨D^⊤_ĥ II, D^⊤ĥ⟩ with tangential projections in both slots.
    let ds: Vec<Vec<f64>> = s
        .iter()
        .map(|c| {
            let gc = surface_gradient(geom, c);
            (0..np).map(|p| dot3(hh, &gc, p)).collect()
        })
        .collect();
    let gh = surface_jacobian(geom, hh);
    let t7: Vec<f64> = (0..np)
        .map(|p| {
            let pr = |m: &dyn Fn(usize) -> f64, a: usize, b: usize| -> f64 {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += proj[3 * a + i][p] * m(3 * i + j) * proj[3 * j + b][p];
                    }
                }
                acc
            };
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += pr(&|i| ds[i][p], a, b) * pr(&|i| gh[i][p], a, b);
                }
            }
            4.0 * acc
        })
        .collect();
    Ok(vec![
        ("alpha2_lap_n_kappa", t1),
        ("alpha2_grad_kappa_sq", t2),
        ("alpha2_ii_sq_n_kappa", t3),
        ("dh_dh_kappa", t4),
        ("dhh_dhh_kappa", t5),
        ("pressure_n_kappa", t6),
        ("dhh_ii_dhh", t7),
    ])
}

/// Residuals on a window of five consecutive states spaced by `dt`.
pub fn kappa_evolution_residuals(problem: &Problem, window: &[SimState], dt: f64, filter: Filter) -> Result<IdentityResidualReport> {
    if filter.is_on() {
        return Err(PilError::FilterContamination);
    }
    if window.len() != 5 {
        return Err(PilError::validation("window", "kappa residuals need exactly five states"));
    }
    for w in window.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(PilError::validation("window", "states are not equally spaced by dt"));
        }
    }
    let slab = &problem.slab;
    let grid = &slab.reference.grid;
    let np = grid.np();
    let nz = slab.nz();
    let geoms: Vec<SurfaceGeometry> = window.iter().map(|s| build_geometry(&slab.reference, &s.gamma)).collect::<Result<_>>()?;
    let traces: Vec<(Vec3Field, Vec3Field)> = window.iter().map(|s| interface_values(s, np, nz)).collect();
    let ws: Vec<[Vec<f64>; 2]> =
        geoms.iter().zip(&traces).map(|(g, (v, _))| chart_velocity(problem, g, v)).collect::<Result<_>>()?;
    let k5: [&[f64]; 5] = std::array::from_fn(|j| &geoms[j].kappa[..]);
    let ft = d1(k5, dt);
    let ftt = d2(k5, dt);
    let g = &geoms[2];
    let w = &ws[2];
    let wt: [Vec<f64>; 2] = std::array::from_fn(|i| d1(std::array::from_fn(|j| &ws[j][i][..]), dt));
    let kappa = &g.kappa;
    let wk = chart_advect(grid, w, kappa);
    let dtk: Vec<f64> = (0..np).map(|p| ft[p] + wk[p]).collect();
    let rhs1 = kappa_rate_rhs(g, &traces[2].0);
    let first = (0..np).map(|p| (dtk[p] - rhs1[p]).abs()).fold(0.0, f64::max);

    let a = chart_advect(grid, &wt, kappa);
    let b = chart_advect(grid, w, &ft);
    let c = chart_advect(grid, w, &wk);
    let dttk: Vec<f64> = (0..np).map(|p| ftt[p] + a[p] + 2.0 * b[p] + c[p]).collect();

    let center = &window[2];
    let frame = Frame::new(problem, &center.gamma, center.t, true)?;
    let terms = kappa_second_order_terms(problem, center, &frame)?;
    let second = (0..np)
        .map(|p| (dttk[p] - terms.iter().map(|(_, t)| t[p]).sum::<f64>()).abs())
        .fold(0.0, f64::max);

    let areas: Vec<f64> = geoms.iter().map(|g| g.area()).collect();
    let area_rate = (areas[0] - 8.0 * areas[1] + 8.0 * areas[3] - areas[4]) / (12.0 * dt);
    let theta: Vec<f64> = (0..np)
        .map(|p| {
            let n = g.normal_at(p);
            let v = &traces[2].0;
            v[0][p] * n[0] + v[1][p] * n[1] + v[2][p] * n[2]
        })
        .collect();
    let kt: Vec<f64> = (0..np).map(|p| kappa[p] * theta[p]).collect();
    let ds_transport = (area_rate - surface_integral(g, &kt)).abs();

    Ok(IdentityResidualReport {
        simons: simons_residual(g),
        lap_n: codazzi_normal_residual(g),
        ds_transport,
        kappa_first_order: first,
        kappa_second_order: second,
        kappa_second_lhs: max_abs(&dttk),
        energy_budget: None,
        second_order_terms: terms.into_iter().map(|(n, t)| (n, max_abs(&t))).collect(),
        resolution: [grid.nu, grid.nv, nz],
        dt,
        filtered: false,
    })
}
