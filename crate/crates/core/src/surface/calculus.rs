//! Tangential calculus on `Γ_t` in the parameter chart.

use super::{at, SurfaceGeometry, Vec3Field};
use crate::error::{ensure_finite, Result};

/// `∇_Γ f` and `Δ_Γ f` together.
#[derive(Clone, Debug)]
pub struct TangentialCalculus {
    pub gradient: Vec3Field,
    pub laplacian: Vec<f64>,
}

/// Contravariant components `(g^{uj}∂_j f, g^{vj}∂_j f)`.
fn raise(geom: &SurfaceGeometry, fu: &[f64], fv: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let gi = &geom.metric_inv;
    let n = fu.len();
    let mut au = vec![0.0; n];
    let mut av = vec![0.0; n];
    for p in 0..n {
        au[p] = gi[0][p] * fu[p] + gi[1][p] * fv[p];
        av[p] = gi[1][p] * fu[p] + gi[2][p] * fv[p];
    }
    (au, av)
}

/// Tangential gradient as an ambient vector, `g^{ij}∂_j f Φ_i`.
pub fn surface_gradient(geom: &SurfaceGeometry, f: &[f64]) -> Vec3Field {
    let (fu, fv) = geom.grid.grad(f);
    let (au, av) = raise(geom, &fu, &fv);
    std::array::from_fn(|k| (0..f.len()).map(|p| au[p] * geom.tu[k][p] + av[p] * geom.tv[k][p]).collect())
}

/// Laplace–Beltrami operator in divergence form,
/// `(1/√g) ∂_i(√g g^{ij} ∂_j f)`.
pub fn laplace_beltrami(geom: &SurfaceGeometry, f: &[f64]) -> Vec<f64> {
    let (fu, fv) = geom.grid.grad(f);
    let (mut au, mut av) = raise(geom, &fu, &fv);
    for p in 0..f.len() {
        au[p] *= geom.area_elem[p];
        av[p] *= geom.area_elem[p];
    }
    let du = geom.grid.diff(&au, 1, 0);
    let dv = geom.grid.diff(&av, 0, 1);
    (0..f.len()).map(|p| (du[p] + dv[p]) / geom.area_elem[p]).collect()
}

/// Surface divergence of an ambient field on `Γ`, `g^{ij} ∂_i X · Φ_j`.
pub fn surface_divergence(geom: &SurfaceGeometry, x: &Vec3Field) -> Vec<f64> {
    let np = geom.grid.np();
    let mut out = vec![0.0; np];
    for k in 0..3 {
        let (xu, xv) = geom.grid.grad(&x[k]);
        let (au, av) = raise(geom, &xu, &xv);
        for p in 0..np {
            out[p] += au[p] * geom.tu[k][p] + av[p] * geom.tv[k][p];
        }
    }
    out
}

/// Both tangential operators on a scalar, rejecting non-finite input.
pub fn tangential_calculus(geom: &SurfaceGeometry, f: &[f64]) -> Result<TangentialCalculus> {
    ensure_finite("surface scalar", f)?;
    Ok(TangentialCalculus { gradient: surface_gradient(geom, f), laplacian: laplace_beltrami(geom, f) })
}

/// `∫_Γ f dS` by the trapezoidal rule in the chart.
pub fn surface_integral(geom: &SurfaceGeometry, f: &[f64]) -> f64 {
    let w = geom.grid.du() * geom.grid.dv();
    f.iter().zip(&geom.area_elem).map(|(a, b)| a * b).sum::<f64>() * w
}

/// Ambient shape operator `S = D_Γ n`, row-major 3×3 per point.
pub fn shape_operator(geom: &SurfaceGeometry) -> [Vec<f64>; 9] {
    let np = geom.grid.np();
    let mut s: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; np]);
    for p in 0..np {
        let (iuu, iuv, ivv) = (geom.metric_inv[0][p], geom.metric_inv[1][p], geom.metric_inv[2][p]);
        let (luu, luv, lvv) = (geom.second_form[0][p], geom.second_form[1][p], geom.second_form[2][p]);
        // B = g^{-1} II g^{-1}
        let m = [[iuu * luu + iuv * luv, iuu * luv + iuv * lvv], [iuv * luu + ivv * luv, iuv * luv + ivv * lvv]];
        let b = [
            [m[0][0] * iuu + m[0][1] * iuv, m[0][0] * iuv + m[0][1] * ivv],
            [m[1][0] * iuu + m[1][1] * iuv, m[1][0] * iuv + m[1][1] * ivv],
        ];
        let t = [at(&geom.tu, p), at(&geom.tv, p)];
        for a in 0..3 {
            for c in 0..3 {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        acc += b[i][j] * t[i][a] * t[j][c];
                    }
                }
                s[3 * a + c][p] = acc;
            }
        }
    }
    s
}

/// Tangential projector `I - n⊗n`, row-major 3×3 per point.
pub fn tangential_projector(geom: &SurfaceGeometry) -> [Vec<f64>; 9] {
    let np = geom.grid.np();
    std::array::from_fn(|idx| {
        let (a, b) = (idx / 3, idx % 3);
        (0..np)
            .map(|p| (if a == b { 1.0 } else { 0.0 }) - geom.normal[a][p] * geom.normal[b][p])
            .collect()
    })
}

/// Tangential part of an ambient field.
pub fn tangential_part(geom: &SurfaceGeometry, x: &Vec3Field) -> Vec3Field {
    let np = geom.grid.np();
    let mut out = x.clone();
    for p in 0..np {
        let n = at(&geom.normal, p);
        let d = x[0][p] * n[0] + x[1][p] * n[1] + x[2][p] * n[2];
        for k in 0..3 {
            out[k][p] -= d * n[k];
        }
    }
    out
}

/// `a · ∇_Γ f`.
pub fn directional_derivative(geom: &SurfaceGeometry, a: &Vec3Field, f: &[f64]) -> Vec<f64> {
    let g = surface_gradient(geom, f);
    (0..f.len()).map(|p| a[0][p] * g[0][p] + a[1][p] * g[1][p] + a[2][p] * g[2][p]).collect()
}
