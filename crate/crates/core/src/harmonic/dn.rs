//! Dense Dirichlet–Neumann operators and the fractional surface powers built
//! from them.
//!
//! Everything is symmetrized in the `dS`-weighted inner product: with
//! `W = √g du dv` a matrix `M` self-adjoint for `⟨·,·⟩_dS` becomes the
//! symmetric `W^{1/2} M W^{-1/2}`.

use super::grid::Side;
use super::Tolerances;
use crate::error::{PilError, Result};
use crate::surface::{laplace_beltrami, SurfaceGeometry};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(m);
    let n = e.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn weights(geom: &SurfaceGeometry) -> Vec<f64> {
    let w = geom.grid.du() * geom.grid.dv();
    geom.area_elem.iter().map(|a| a * w).collect()
}

/// Similarity `W^{1/2} M W^{-1/2}`.
fn conjugate(m: &DMatrix<f64>, sw: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| sw[r] * m[(r, c)] / sw[c])
}

/// Assembled `𝒩_±` with its spectral decomposition.
#[derive(Clone, Debug)]
pub struct DNOperator {
    pub side: Side,
    /// `matrix[(p, q)]` is `(𝒩 e_q)(p)`.
    pub matrix: DMatrix<f64>,
    /// Quadrature weights `√g du dv`.
    pub weights: Vec<f64>,
    /// Ascending eigenvalues of the symmetrized operator.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of the symmetrized operator (columns).
    pub q: DMatrix<f64>,
    /// Relative antisymmetric part of `⟨M·,·⟩_dS` on the resolved modes.
    pub symmetry_defect: f64,
    /// `|M·1|_∞`.
    pub kernel_defect: f64,
    /// Eigenvalues at or below this are treated as the constant kernel.
    pub kernel_floor: f64,
}

/// Real Fourier basis restricted to the dealiased band, Nyquist excluded.
fn resolved_basis(geom: &SurfaceGeometry) -> DMatrix<f64> {
    let grid = &geom.grid;
    let (ku_max, kv_max) = grid.dealias_kmax();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for p in 0..grid.np() {
        let (i, j) = (p / grid.nv, p % grid.nv);
        let (ku, kv) = (grid.ku(i), grid.kv(j));
        if ku.abs() > ku_max || kv.abs() > kv_max || grid.is_nyquist_u(i) || grid.is_nyquist_v(j) {
            continue;
        }
        // One representative per conjugate pair.
        if ku < 0.0 || (ku == 0.0 && kv < 0.0) {
            continue;
        }
        cols.push(grid.sample(|u, v| (ku * u + kv * v).cos()));
        if ku != 0.0 || kv != 0.0 {
            cols.push(grid.sample(|u, v| (ku * u + kv * v).sin()));
        }
    }
    DMatrix::from_fn(grid.np(), cols.len(), |r, c| cols[c][r])
}

impl DNOperator {
    pub fn from_columns(side: Side, geom: &SurfaceGeometry, cols: &[Vec<f64>], tol: Tolerances) -> Result<Self> {
        let np = cols.len();
        let matrix = DMatrix::from_fn(np, np, |r, c| cols[c][r]);
        let weights = weights(geom);
        let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let mt = conjugate(&matrix, &sw);
        let scale = mt.amax().max(1e-300);
        let b = resolved_basis(geom);
        let wb = DMatrix::from_fn(np, b.ncols(), |r, c| weights[r] * b[(r, c)]);
        let form = wb.transpose() * &matrix * &b;
        let symmetry_defect = (&form - form.transpose()).amax() / form.amax().max(1e-300);
        let kernel_defect = (0..np).map(|r| matrix.row(r).sum().abs()).fold(0.0, f64::max);
        let (eigenvalues, q) = sorted_eigen(symmetrize(&mt));
        if eigenvalues[0] < -tol.eig.max(tol.dn) * scale.max(1.0) {
            return Err(PilError::NegativeEigenvalue { value: eigenvalues[0] });
        }
        let kernel_floor = tol.dn * eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
        Ok(DNOperator { side, matrix, weights, eigenvalues, q, symmetry_defect, kernel_defect, kernel_floor })
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(f);
        v.iter().copied().collect()
    }

    fn spectral(&self, f: &[f64], g: impl Fn(usize, f64) -> f64) -> Vec<f64> {
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let ft = DVector::from_iterator(f.len(), f.iter().zip(&sw).map(|(a, s)| a * s));
        let mut c = self.q.transpose() * ft;
        for (i, ci) in c.iter_mut().enumerate() {
            let l = self.eigenvalues[i];
            *ci *= g(i, if l <= self.kernel_floor { 0.0 } else { l });
        }
        let out = &self.q * c;
        out.iter().zip(&sw).map(|(a, s)| a / s).collect()
    }

    /// `𝒩^e f` for `e ≥ 0` through the symmetrized decomposition.
    pub fn power(&self, f: &[f64], e: f64) -> Vec<f64> {
        self.spectral(f, |_, l| if l == 0.0 { if e == 0.0 { 1.0 } else { 0.0 } } else { l.powf(e) })
    }

    /// `𝒩^{-1}` on `dS`-mean-zero data.
    pub fn inverse_mean_zero(&self, f: &[f64]) -> Result<Vec<f64>> {
        let mean: f64 = f.iter().zip(&self.weights).map(|(a, w)| a * w).sum();
        let area: f64 = self.weights.iter().sum();
        let fnorm = f.iter().zip(&self.weights).map(|(a, w)| a * a * w).sum::<f64>().sqrt();
        if mean.abs() / area.sqrt() > 1e-8 * fnorm.max(1e-300) {
            return Err(PilError::SingularInverse);
        }
        Ok(self.spectral(f, |_, l| if l == 0.0 { 0.0 } else { 1.0 / l }))
    }

    /// Number of eigenvalues below `tol·λ_max`.
    pub fn numerical_kernel_dim(&self, tol: f64) -> usize {
        let top = self.eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
        self.eigenvalues.iter().filter(|l| l.abs() <= tol * top).count()
    }

    /// `⟨f, g⟩_dS`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }
}

/// Dense `-Δ_Γ`, column by column.
fn neg_laplacian_matrix(geom: &SurfaceGeometry) -> DMatrix<f64> {
    let np = geom.grid.np();
    let mut m = DMatrix::zeros(np, np);
    let mut e = vec![0.0; np];
    for q in 0..np {
        e[q] = 1.0;
        let col = laplace_beltrami(geom, &e);
        for r in 0..np {
            m[(r, q)] = -col[r];
        }
        e[q] = 0.0;
    }
    m
}

/// `(𝒩^{1/2}(-Δ_Γ)𝒩^{1/2})^{l/2} 𝒩^{1/2}` for all `l` from one
/// decomposition.
#[derive(Clone, Debug)]
pub struct FractionalPowers {
    sqrt_w: Vec<f64>,
    /// Symmetrized `𝒩^{1/2}`.
    n_half: DMatrix<f64>,
    mu: Vec<f64>,
    v: DMatrix<f64>,
    floor: f64,
}

impl FractionalPowers {
    pub fn new(dn: &DNOperator, geom: &SurfaceGeometry, tol: Tolerances) -> Result<Self> {
        let sqrt_w: Vec<f64> = dn.weights.iter().map(|w| w.sqrt()).collect();
        let lt = symmetrize(&conjugate(&neg_laplacian_matrix(geom), &sqrt_w));
        let lam = DVector::from_iterator(
            dn.eigenvalues.len(),
            dn.eigenvalues.iter().map(|&l| if l <= dn.kernel_floor { 0.0 } else { l.sqrt() }),
        );
        let n_half = &dn.q * DMatrix::from_diagonal(&lam) * dn.q.transpose();
        let a = symmetrize(&(&n_half * &lt * &n_half));
        let (mu, v) = sorted_eigen(a);
        let top = mu.last().copied().unwrap_or(0.0).abs().max(1.0);
        if mu[0] < -tol.eig * top {
            return Err(PilError::NegativeEigenvalue { value: mu[0] });
        }
        Ok(FractionalPowers { sqrt_w, n_half, mu, v, floor: tol.dn * top })
    }

    /// Apply the order-`l` operator.
    pub fn apply(&self, l: u32, f: &[f64]) -> Vec<f64> {
        let ft = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_w).map(|(a, s)| a * s));
        let h = &self.n_half * ft;
        let out = if l == 0 {
            h
        } else {
            let mut c = self.v.transpose() * h;
            let floor = self.floor;
            for (ci, m) in c.iter_mut().zip(&self.mu) {
                *ci *= if *m <= floor { 0.0 } else { m.powf(l as f64 / 2.0) };
            }
            &self.v * c
        };
        out.iter().zip(&self.sqrt_w).map(|(a, s)| a / s).collect()
    }

    /// Eigenvalues of the symmetrized `𝒩^{1/2}(-Δ_Γ)𝒩^{1/2}`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.mu
    }
}

/// `⟨f, (I - Δ_Γ)^{1/2} f⟩_dS`.
pub fn sobolev_half_form(geom: &SurfaceGeometry, f: &[f64]) -> f64 {
    let w = weights(geom);
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let lt = symmetrize(&conjugate(&neg_laplacian_matrix(geom), &sw));
    let (mu, v) = sorted_eigen(lt);
    let ft = DVector::from_iterator(f.len(), f.iter().zip(&sw).map(|(a, s)| a * s));
    let c = v.transpose() * ft;
    c.iter().zip(&mu).map(|(ci, m)| ci * ci * (1.0 + m.max(0.0)).sqrt()).sum()
}
