//! Residuals of the classical hypersurface identities
//! `Δ_Γ II = D²κ + (κ II − |II|² I)·II` and `Δ_Γ n = −|II|² n + ∇_Γ κ`.
//!
//! Tensors are handled extrinsically: a tangential tensor is an ambient 3×3
//! field with `P T P = T`, and covariant derivatives are projected ambient
//! tangential derivatives.

use super::calculus::{laplace_beltrami, shape_operator, surface_divergence, surface_gradient, tangential_projector};
use super::{SurfaceGeometry, Vec3Field};

/// Grid-max residuals of the two identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResiduals {
    pub simons: f64,
    pub lap_n: f64,
}

type Tensor = [Vec<f64>; 9];

fn project2(proj: &Tensor, t: &Tensor, p: usize, a: usize, b: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let pa = proj[3 * a + i][p];
        if pa == 0.0 {
            continue;
        }
        for j in 0..3 {
            acc += pa * proj[3 * b + j][p] * t[3 * i + j][p];
        }
    }
    acc
}

/// Grid max of `|Δ_Γ II − D²κ − κ II² + |II|² II|` (Frobenius).
pub fn simons_residual(geom: &SurfaceGeometry) -> f64 {
    let np = geom.grid.np();
    let s = shape_operator(geom);
    let proj = tangential_projector(geom);

    // ∇_c S_ab (c tangential), then projected in a, b.
    let grads: Vec<Vec3Field> = s.iter().map(|c| surface_gradient(geom, c)).collect();
    let mut cov: [Tensor; 3] = std::array::from_fn(|_| std::array::from_fn(|_| vec![0.0; np]));
    for c in 0..3 {
        let raw: Tensor = std::array::from_fn(|ab| grads[ab][c].clone());
        for a in 0..3 {
            for b in 0..3 {
                for p in 0..np {
                    cov[c][3 * a + b][p] = project2(&proj, &raw, p, a, b);
                }
            }
        }
    }
    // Rough Laplacian: projected surface divergence over c.
    let div: Tensor = std::array::from_fn(|ab| {
        let field: Vec3Field = [cov[0][ab].clone(), cov[1][ab].clone(), cov[2][ab].clone()];
        surface_divergence(geom, &field)
    });
    let grad_k = surface_gradient(geom, &geom.kappa);
    let hess_raw: Vec<Vec3Field> = grad_k.iter().map(|c| surface_gradient(geom, c)).collect();
    // hess_raw[b][a] = ∂_a (∇κ)_b
    let hess_t: Tensor = std::array::from_fn(|ab| hess_raw[ab % 3][ab / 3].clone());

    let mut worst = 0.0_f64;
    for p in 0..np {
        let mut s2 = [0.0; 9];
        let mut norm2 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                norm2 += s[3 * a + b][p] * s[3 * a + b][p];
                for c in 0..3 {
                    s2[3 * a + b] += s[3 * a + c][p] * s[3 * c + b][p];
                }
            }
        }
        let k = geom.kappa[p];
        let mut r2 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let lap = project2(&proj, &div, p, a, b);
                let hess = project2(&proj, &hess_t, p, a, b);
                let r = lap - hess - k * s2[3 * a + b] + norm2 * s[3 * a + b][p];
                r2 += r * r;
            }
        }
        worst = worst.max(r2.sqrt());
    }
    worst
}

/// Grid max of `|Δ_Γ n + |II|² n − ∇_Γ κ|`.
pub fn codazzi_normal_residual(geom: &SurfaceGeometry) -> f64 {
    let np = geom.grid.np();
    let s = shape_operator(geom);
    let lap: Vec<Vec<f64>> = geom.normal.iter().map(|c| laplace_beltrami(geom, c)).collect();
    let gk = surface_gradient(geom, &geom.kappa);
    let mut worst = 0.0_f64;
    for p in 0..np {
        let norm2: f64 = (0..9).map(|i| s[i][p] * s[i][p]).sum();
        let mut r2 = 0.0;
        for k in 0..3 {
            let r = lap[k][p] + norm2 * geom.normal[k][p] - gk[k][p];
            r2 += r * r;
        }
        worst = worst.max(r2.sqrt());
    }
    worst
}

/// Second fundamental form (as stored on the geometry) with both residuals.
pub fn second_form_and_identities(geom: &SurfaceGeometry) -> (Vec3Field, IdentityResiduals) {
    (geom.second_form.clone(), IdentityResiduals { simons: simons_residual(geom), lap_n: codazzi_normal_residual(geom) })
}
