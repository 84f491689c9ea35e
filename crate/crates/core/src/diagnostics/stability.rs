use crate::error::Result;
use crate::evolution::{Frame, Problem, SimState};
use crate::fields::{interface_trace3, pressure_decomposition, rt_indicator};
use crate::surface::{SurfaceGeometry, Vec3Field};

/// Stability monitors on `Γ_t`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StabilityReport {
    /// `min 𝔱` with `𝔱 = -∇_n(p_vv - p_hh)`.
    pub rt_min: f64,
    /// `Υ(h, ĥ)`.
    pub upsilon: f64,
    /// `dist(Γ_t, walls)`.
    pub wall_gap: f64,
    /// `δ0 - max|γ|`.
    pub chart_margin: f64,
    /// `min(|h×ĥ|² - |h×v|²)`, the strict Syrovatskij inequality with the
    /// vacuum as a massless second fluid at rest.
    pub syrovatskij_margin: f64,
}

/// Orthonormal tangent frame `(e₁, e₂)` from the chart tangents.
pub fn tangent_frame(geom: &SurfaceGeometry, p: usize) -> [[f64; 3]; 2] {
    let a = [geom.tu[0][p], geom.tu[1][p], geom.tu[2][p]];
    let b = [geom.tv[0][p], geom.tv[1][p], geom.tv[2][p]];
    let la = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let e1 = [a[0] / la, a[1] / la, a[2] / la];
    let d = b[0] * e1[0] + b[1] * e1[1] + b[2] * e1[2];
    let r = [b[0] - d * e1[0], b[1] - d * e1[1], b[2] - d * e1[2]];
    let lr = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    [e1, [r[0] / lr, r[1] / lr, r[2] / lr]]
}

/// `x·y - z·w` with one rounding (Kahan's 2×2 determinant).
fn det2(x: f64, y: f64, z: f64, w: f64) -> f64 {
    let zw = z * w;
    let err = (-z).mul_add(w, zw);
    x.mul_add(y, -zw) + err
}

/// `min_{|a|=1} (a·h)² + (a·ĥ)²` for tangent components `h = (h₁, h₂)`,
/// `ĥ = (ĥ₁, ĥ₂)`: the smallest eigenvalue of `h⊗h + ĥ⊗ĥ`. Exactly zero for
/// inputs collinear up to rounding.
pub fn upsilon_point(h: [f64; 2], hh: [f64; 2]) -> f64 {
    let a = h[0] * h[0] + hh[0] * hh[0];
    let c = h[1] * h[1] + hh[1] * hh[1];
    let b = h[0] * h[1] + hh[0] * hh[1];
    let cross = det2(h[0], hh[1], h[1], hh[0]);
    // Cross products within rounding of zero are exact collinearity.
    if cross.abs() <= 4.0 * f64::EPSILON * h[0].hypot(h[1]) * hh[0].hypot(hh[1]) {
        return 0.0;
    }
    let det = cross * cross;
    let tr = a + c;
    det / (0.5 * (tr + ((a - c).powi(2) + 4.0 * b * b).sqrt()))
}

/// Per-point `Υ` on the chart grid for ambient traces of `h` and `ĥ`.
pub fn upsilon_field(geom: &SurfaceGeometry, h: &Vec3Field, hh: &Vec3Field) -> Vec<f64> {
    (0..geom.grid.np())
        .map(|p| {
            let [e1, e2] = tangent_frame(geom, p);
            let dot = |x: &Vec3Field, e: [f64; 3]| x[0][p] * e[0] + x[1][p] * e[1] + x[2][p] * e[2];
            upsilon_point([dot(h, e1), dot(h, e2)], [dot(hh, e1), dot(hh, e2)])
        })
        .collect()
}

/// All monitors. `frame` must belong to `state.gamma`.
pub fn stability_monitors(problem: &Problem, state: &SimState, frame: &Frame) -> Result<StabilityReport> {
    let plus = &frame.plus;
    let parts = pressure_decomposition(
        &problem.slab,
        plus,
        &frame.geom,
        state.v_ref(),
        state.h_ref(),
        &frame.hhat_trace,
        problem.alpha,
    )?;
    let rt = rt_indicator(plus, &parts.q);
    let rt_min = rt.iter().copied().fold(f64::INFINITY, f64::min);
    let ht = interface_trace3(plus, state.h_ref());
    let vt = interface_trace3(plus, state.v_ref());
    let ups = upsilon_field(&frame.geom, &ht, &frame.hhat_trace);
    let upsilon = ups.iter().copied().fold(f64::INFINITY, f64::min);
    let np = plus.np();
    let cross2 = |a: [f64; 3], b: [f64; 3]| {
        (a[1] * b[2] - a[2] * b[1]).powi(2) + (a[2] * b[0] - a[0] * b[2]).powi(2) + (a[0] * b[1] - a[1] * b[0]).powi(2)
    };
    let syrovatskij_margin = (0..np)
        .map(|p| {
            let h = [ht[0][p], ht[1][p], ht[2][p]];
            let hh = [frame.hhat_trace[0][p], frame.hhat_trace[1][p], frame.hhat_trace[2][p]];
            let v = [vt[0][p], vt[1][p], vt[2][p]];
            cross2(h, hh) - cross2(h, v)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(StabilityReport {
        rt_min,
        upsilon,
        wall_gap: frame.geom.wall_gap(),
        chart_margin: problem.slab.reference.delta0 - state.gamma.max_abs(),
        syrovatskij_margin,
    })
}
