//! The modified-curvature map `K(γ) = κ∘Φ + a²γ` and its Newton inverse.

use super::{build_geometry, HeightField, ReferenceSurface};
use crate::error::{ensure_finite, PilError, Result};
use crate::spectral::{max_abs, Fourier2};
use nalgebra::{DMatrix, DVector};

/// `κ_a` sampled on the reference grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedCurvature {
    pub values: Vec<f64>,
    pub a: f64,
}

/// Forward map `γ ↦ κ(γ) + a²γ`.
pub fn kappa_a_forward(reference: &ReferenceSurface, gamma: &HeightField, a: f64) -> Result<ModifiedCurvature> {
    let geom = build_geometry(reference, gamma)?;
    let a2 = a * a;
    let values = geom.kappa.iter().zip(&gamma.values).map(|(k, g)| k + a2 * g).collect();
    Ok(ModifiedCurvature { values, a })
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Sup-norm residual tolerance.
    pub tol: f64,
    /// Amplitude of the finite-difference probes.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 12, tol: 1e-12, fd_step: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Real Fourier basis of the grid: `cos(k·x)` and `sin(k·x)` over a half set
/// of wavenumbers, cosine only for self-conjugate modes. Spans all grid
/// functions.
pub(crate) fn real_fourier_basis(grid: &Fourier2) -> Vec<Vec<f64>> {
    let (nu, nv) = (grid.nu, grid.nv);
    let mut out = Vec::with_capacity(grid.np());
    for p in 0..grid.np() {
        let (i, j) = (p / nv, p % nv);
        let q = ((nu - i) % nu) * nv + (nv - j) % nv;
        if p > q {
            continue;
        }
        let (ku, kv) = (grid.ku(i), grid.kv(j));
        out.push(grid.sample(|u, v| (ku * u + kv * v).cos()));
        if p < q {
            out.push(grid.sample(|u, v| (ku * u + kv * v).sin()));
        }
    }
    out
}

/// Newton inversion of `K` with a Jacobian assembled by central differences
/// along the real Fourier basis.
pub fn kappa_a_invert(
    reference: &ReferenceSurface,
    target: &ModifiedCurvature,
    guess: &HeightField,
    opts: NewtonOptions,
) -> Result<(HeightField, NewtonReport)> {
    ensure_finite("curvature target", &target.values)?;
    let a = target.a;
    let basis = real_fourier_basis(&reference.grid);
    let n = basis.len();
    let mut gamma = guess.clone();
    let residual_of = |g: &HeightField| -> Result<Vec<f64>> {
        let k = kappa_a_forward(reference, g, a)?;
        Ok(k.values.iter().zip(&target.values).map(|(x, y)| x - y).collect())
    };
    let mut r = residual_of(&gamma)?;
    let mut res = max_abs(&r);
    let mut iterations = 0;
    while res > opts.tol {
        if iterations >= opts.max_iter {
            return Err(PilError::NewtonDiverged { iterations, residual: res });
        }
        let h = opts.fd_step;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for (col, phi) in basis.iter().enumerate() {
            let plus = HeightField { values: gamma.values.iter().zip(phi).map(|(g, f)| g + h * f).collect() };
            let minus = HeightField { values: gamma.values.iter().zip(phi).map(|(g, f)| g - h * f).collect() };
            let kp = kappa_a_forward(reference, &plus, a)?;
            let km = kappa_a_forward(reference, &minus, a)?;
            for row in 0..n {
                jac[(row, col)] = (kp.values[row] - km.values[row]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|x| -x));
        let coeffs = jac.lu().solve(&rhs).ok_or(PilError::NewtonDiverged { iterations, residual: res })?;
        for (c, phi) in coeffs.iter().zip(&basis) {
            for (g, f) in gamma.values.iter_mut().zip(phi) {
                *g += c * f;
            }
        }
        iterations += 1;
        let next = residual_of(&gamma)?;
        let next_res = max_abs(&next);
        if !next_res.is_finite() {
            return Err(PilError::NewtonDiverged { iterations, residual: next_res });
        }
        r = next;
        res = next_res;
    }
    Ok((gamma, NewtonReport { iterations, residual: res }))
}
