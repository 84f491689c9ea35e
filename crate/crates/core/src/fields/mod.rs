//! Field recovery: plasma div-curl, the vacuum magnetic field, pressure
//! parts and the residual diagnostics built on them.

mod divcurl;
mod pressure;
mod vacuum;

pub use divcurl::{curl_particular, leray_project, solve_divcurl_plus, DivCurlData, DivCurlReport, GaugeStart};
pub use pressure::{
    pressure_decomposition, pressure_total, rt_indicator, trace_product, w_residual, PressureParts, WResidual,
};
pub use vacuum::{solve_time_derivative_vacuum, solve_vacuum_field, vacuum_normal_rate, SurfaceCurrent, VacuumReport};

use crate::harmonic::{BulkField, BulkGrid};
use crate::surface::Vec3Field;

/// Plasma velocity and magnetic field with the vacuum field.
#[derive(Clone, Debug)]
pub struct VectorState {
    pub v: BulkField,
    pub h: BulkField,
    pub hhat: BulkField,
}

/// Wall fluxes `𝔳 = ∫_{Γ+} v dS`, `𝔥 = ∫_{Γ+} h dS` (horizontal parts).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Fluxes {
    pub v: [f64; 2],
    pub h: [f64; 2],
}

/// `u·n` on the interface plane, `n` the interface normal.
pub fn interface_dot_normal(grid: &BulkGrid, u: [&[f64]; 3]) -> Vec<f64> {
    let np = grid.np();
    let off = grid.interface_plane() * np;
    (0..np)
        .map(|p| (0..3).map(|a| u[a][off + p] * grid.interface_normal[a][p]).sum())
        .collect()
}

/// Interface-plane values of a vector field.
pub fn interface_trace3(grid: &BulkGrid, u: [&[f64]; 3]) -> Vec3Field {
    std::array::from_fn(|a| grid.interface_trace(u[a]))
}

/// `∫` over the flat wall plane.
pub fn wall_integral(grid: &BulkGrid, f: &[f64]) -> f64 {
    let w = grid.grid.du() * grid.grid.dv();
    grid.plane(f, grid.wall_plane()).iter().sum::<f64>() * w
}

/// Horizontal wall flux `∫_{wall} (u_x, u_y) dS`.
pub fn wall_flux(grid: &BulkGrid, u: [&[f64]; 3]) -> [f64; 2] {
    [wall_integral(grid, u[0]), wall_integral(grid, u[1])]
}

/// Largest pointwise `|u·e_z|` on the wall plane.
pub fn wall_normal_max(grid: &BulkGrid, u: [&[f64]; 3]) -> f64 {
    grid.plane(u[2], grid.wall_plane()).iter().fold(0.0, |m, x| m.max(x.abs()))
}
