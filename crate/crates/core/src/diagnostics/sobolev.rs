//! Higher-order energies built from `𝒟 = (-𝒩₊^{1/2}Δ_Γ𝒩₊^{1/2})^{1/2}`.

use super::energy::physical_energy;
use super::kappa::kappa_rate_rhs;
use crate::error::{PilError, Result};
use crate::evolution::{Frame, Problem, SimState};
use crate::fields::{interface_trace3, pressure_decomposition, rt_indicator};
use crate::harmonic::{BulkGrid, DNOperator, FractionalPowers};
use crate::surface::{surface_gradient, surface_integral, SurfaceGeometry, Vec3Field};

/// Surface inputs of the energies.
#[derive(Clone, Debug)]
pub struct SobolevInputs {
    pub kappa: Vec<f64>,
    /// `D_tκ`.
    pub dt_kappa: Vec<f64>,
    /// `D_hκ`.
    pub dh_kappa: Vec<f64>,
    /// `D_ĥκ`.
    pub dhh_kappa: Vec<f64>,
    /// RT weight `𝔱 = -∇_n(p_vv - p_hh)`.
    pub rt: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SobolevEnergies {
    pub k: u32,
    /// `E_l` for `l = 0..=k-2`.
    pub e_l: Vec<f64>,
    /// `Ē_α`.
    pub e_bar_alpha: f64,
    /// `ℰ₀..ℰ₃`.
    pub script: [f64; 4],
}

fn sq_integral(geom: &SurfaceGeometry, f: &[f64]) -> f64 {
    let s: Vec<f64> = f.iter().map(|x| x * x).collect();
    surface_integral(geom, &s)
}

/// `∫|𝒟^l 𝒩^{1/2} f|² dS`.
fn dterm(geom: &SurfaceGeometry, fp: &FractionalPowers, l: u32, f: &[f64]) -> f64 {
    sq_integral(geom, &fp.apply(l, f))
}

/// `E_l`, `Ē_α` and `ℰ₁` from surface inputs; `k ≥ 3`.
pub fn surface_energies(
    geom: &SurfaceGeometry,
    dn: &DNOperator,
    fp: &FractionalPowers,
    input: &SobolevInputs,
    k: u32,
    alpha: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    if k < 3 {
        return Err(PilError::validation("k", "energies need k >= 3"));
    }
    let a2 = alpha * alpha;
    let e_l = (0..=k - 2)
        .map(|l| {
            dterm(geom, fp, l, &input.dt_kappa)
                + dterm(geom, fp, l + 1, &input.kappa)
                + dterm(geom, fp, l, &input.dh_kappa)
                + dterm(geom, fp, l, &input.dhh_kappa)
        })
        .collect();
    let common = dterm(geom, fp, k - 2, &input.dt_kappa)
        + a2 * dterm(geom, fp, k - 1, &input.kappa)
        + dterm(geom, fp, k - 2, &input.dh_kappa);
    // 𝒟^{k-2}𝒩κ = 𝒟^{k-2}𝒩^{1/2}(𝒩^{1/2}κ)
    let nk = fp.apply(k - 2, &dn.power(&input.kappa, 0.5));
    let weighted: Vec<f64> = nk.iter().zip(&input.rt).map(|(x, t)| t * x * x).collect();
    let e_bar = common + surface_integral(geom, &weighted);
    let e1 = common + dterm(geom, fp, k - 2, &input.dhh_kappa);
    Ok((e_l, e_bar, e1))
}

/// `Σ_{j≤m} ‖D^j f‖²` over the plasma grid, with the Frobenius norm of the
/// `j`-th derivative tensor.
pub fn bulk_sobolev_sq(grid: &BulkGrid, f: &[f64], m: u32) -> f64 {
    let mut level = vec![f.to_vec()];
    let mut total = 0.0;
    for j in 0..=m {
        for g in &level {
            let s: Vec<f64> = g.iter().map(|x| x * x).collect();
            total += grid.integrate(&s);
        }
        if j < m {
            level = level.iter().flat_map(|g| grid.grad(g)).collect();
        }
    }
    total
}

fn directional(geom: &SurfaceGeometry, a: &Vec3Field, f: &[f64]) -> Vec<f64> {
    let g = surface_gradient(geom, f);
    (0..f.len()).map(|p| a[0][p] * g[0][p] + a[1][p] * g[1][p] + a[2][p] * g[2][p]).collect()
}

/// All energies of one state. Assembles the plasma-side DN operator.
pub fn sobolev_energies(problem: &Problem, state: &SimState, frame: &Frame, k: u32) -> Result<SobolevEnergies> {
    let slab = &problem.slab;
    let geom = &frame.geom;
    let plus = &frame.plus;
    let dn = slab.dn_operator(plus, geom)?;
    let fp = FractionalPowers::new(&dn, geom, slab.tol)?;
    let vt = interface_trace3(plus, state.v_ref());
    let ht = interface_trace3(plus, state.h_ref());
    let parts = pressure_decomposition(slab, plus, geom, state.v_ref(), state.h_ref(), &frame.hhat_trace, problem.alpha)?;
    let input = SobolevInputs {
        kappa: geom.kappa.clone(),
        dt_kappa: kappa_rate_rhs(geom, &vt),
        dh_kappa: directional(geom, &ht, &geom.kappa),
        dhh_kappa: directional(geom, &frame.hhat_trace, &geom.kappa),
        rt: rt_indicator(plus, &parts.q),
    };
    let (e_l, e_bar_alpha, e1) = surface_energies(geom, &dn, &fp, &input, k, problem.alpha)?;
    let e0 = physical_energy(problem, state, frame)?.total;
    let omega = plus.curl(state.v_ref());
    let j = plus.curl(state.h_ref());
    let e2: f64 = omega.iter().chain(j.iter()).map(|c| bulk_sobolev_sq(plus, c, k - 1)).sum();
    let f = &state.fluxes;
    let e3 = f.v[0].powi(2) + f.v[1].powi(2) + f.h[0].powi(2) + f.h[1].powi(2);
    Ok(SobolevEnergies { k, e_l, e_bar_alpha, script: [e0, e1, e2, e3] })
}
