//! Reference surfaces, height-field interfaces and their extrinsic geometry.
//!
//! An interface is the image of the reference surface `Γ*` under
//! `Φ(p) = X*(p) + γ(p) ν(p)`. The normal `n` points from the plasma (above)
//! into the vacuum (below); for a flat interface `n = (0, 0, -1)` and
//! `κ = Div_Γ n = tr II`.

pub mod calculus;
pub mod identities;
pub mod kmap;

use crate::error::{ensure_finite, PilError, Result};
use crate::spectral::{max_abs, Fourier2};
use rustfft::num_complex::Complex64 as C64;

pub use calculus::{
    laplace_beltrami, shape_operator, surface_divergence, surface_gradient, surface_integral,
    tangential_calculus, tangential_projector, TangentialCalculus,
};
pub use identities::{codazzi_normal_residual, second_form_and_identities, simons_residual, IdentityResiduals};
pub use kmap::{kappa_a_forward, kappa_a_invert, ModifiedCurvature, NewtonOptions, NewtonReport};

/// Three grid functions forming an R³-valued field.
pub type Vec3Field = [Vec<f64>; 3];

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn at(f: &Vec3Field, p: usize) -> [f64; 3] {
    [f[0][p], f[1][p], f[2][p]]
}

/// Unit normal `-(Φ_u × Φ_v)/|Φ_u × Φ_v|` from tangent fields.
fn normals(tu: &Vec3Field, tv: &Vec3Field) -> Vec3Field {
    let np = tu[0].len();
    let mut n: Vec3Field = [vec![0.0; np], vec![0.0; np], vec![0.0; np]];
    for p in 0..np {
        let c = cross(at(tu, p), at(tv, p));
        let len = dot(c, c).sqrt();
        for k in 0..3 {
            n[k][p] = -c[k] / len;
        }
    }
    n
}

/// Tangents `Φ_u, Φ_v` of `(u, v, 0) + disp`.
fn tangents(grid: &Fourier2, disp: &Vec3Field) -> (Vec3Field, Vec3Field) {
    let d: Vec<(Vec<f64>, Vec<f64>)> = disp.iter().map(|c| grid.grad(c)).collect();
    let mut tu: Vec3Field = [d[0].0.clone(), d[1].0.clone(), d[2].0.clone()];
    let mut tv: Vec3Field = [d[0].1.clone(), d[1].1.clone(), d[2].1.clone()];
    tu[0].iter_mut().for_each(|x| *x += 1.0);
    tv[1].iter_mut().for_each(|x| *x += 1.0);
    (tu, tv)
}

/// The fixed surface `Γ*` with its transversal field `ν`.
#[derive(Clone, Debug)]
pub struct ReferenceSurface {
    pub grid: Fourier2,
    /// `X*(u, v) = (u, v, 0) + disp(u, v)`; every component periodic.
    pub disp: Vec3Field,
    /// Unit transversal field `ν`.
    pub nu: Vec3Field,
    /// Unit normal `n*` of `Γ*`, same orientation convention as interfaces.
    pub n_star: Vec3Field,
    /// Chart radius `δ0`.
    pub delta0: f64,
    /// Wall gap `c0`.
    pub c0: f64,
}

impl ReferenceSurface {
    /// Flat reference plane `z = z0` with `ν = n* = (0, 0, -1)`.
    pub fn flat(grid: Fourier2, z0: f64, delta0: f64, c0: f64) -> Result<Self> {
        let np = grid.np();
        let disp = [vec![0.0; np], vec![0.0; np], vec![z0; np]];
        let n_star = [vec![0.0; np], vec![0.0; np], vec![-1.0; np]];
        let s = ReferenceSurface { grid, disp, nu: n_star.clone(), n_star, delta0, c0 };
        s.validate()?;
        Ok(s)
    }

    /// Graph reference surface `z = height(u, v)` with `ν` the Gaussian-mollified
    /// normal (width `sigma_cells` grid cells), renormalized.
    pub fn graph(grid: Fourier2, height: Vec<f64>, sigma_cells: f64, delta0: f64, c0: f64) -> Result<Self> {
        ensure_finite("reference height", &height)?;
        let np = grid.np();
        if height.len() != np {
            return Err(PilError::validation("geometry.reference", "height length does not match the grid"));
        }
        let disp = [vec![0.0; np], vec![0.0; np], height];
        Self::from_embedding(grid, disp, sigma_cells, delta0, c0)
    }

    /// General embedding `X* = (u, v, 0) + disp` with mollified-normal `ν`.
    pub fn from_embedding(grid: Fourier2, disp: Vec3Field, sigma_cells: f64, delta0: f64, c0: f64) -> Result<Self> {
        for c in &disp {
            ensure_finite("reference embedding", c)?;
        }
        let (tu, tv) = tangents(&grid, &disp);
        let n_star = normals(&tu, &tv);
        let sigma = sigma_cells * grid.du().max(grid.dv());
        let sm: Vec<Vec<f64>> = n_star.iter().map(|c| grid.gaussian_smooth(c, sigma)).collect();
        let np = grid.np();
        let mut nu: Vec3Field = [vec![0.0; np], vec![0.0; np], vec![0.0; np]];
        for p in 0..np {
            let v = [sm[0][p], sm[1][p], sm[2][p]];
            let len = dot(v, v).sqrt();
            for k in 0..3 {
                nu[k][p] = v[k] / len;
            }
        }
        let s = ReferenceSurface { grid, disp, nu, n_star, delta0, c0 };
        s.validate()?;
        Ok(s)
    }

    /// Replace the transversal field (renormalized to unit length).
    pub fn with_transversal(mut self, nu: Vec3Field) -> Result<Self> {
        for c in &nu {
            ensure_finite("transversal field", c)?;
        }
        for p in 0..self.grid.np() {
            let v = at(&nu, p);
            let len = dot(v, v).sqrt();
            for k in 0..3 {
                self.nu[k][p] = v[k] / len;
            }
        }
        self.validate()?;
        Ok(self)
    }

    /// Same surface shifted by a constant vector.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut s = self.clone();
        for k in 0..3 {
            s.disp[k].iter_mut().for_each(|x| *x += shift[k]);
        }
        s
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0) {
            return Err(PilError::validation("geometry.delta0", "chart radius must be positive"));
        }
        if !(self.c0 > 0.0) {
            return Err(PilError::validation("geometry.c0", "wall gap must be positive"));
        }
        let min_dot = (0..self.grid.np())
            .map(|p| dot(at(&self.nu, p), at(&self.n_star, p)))
            .fold(f64::INFINITY, f64::min);
        if min_dot < 0.9 {
            return Err(PilError::validation("geometry.sigma_nu", format!("nu.n* = {min_dot:.4} < 0.9")));
        }
        let gap = self.disp[2].iter().map(|z| (1.0 - z).min(z + 1.0)).fold(f64::INFINITY, f64::min);
        if gap < 2.0 * self.c0 {
            return Err(PilError::validation(
                "geometry.z0",
                format!("reference surface is {gap:.4} from a wall, need >= 2 c0 = {:.4}", 2.0 * self.c0),
            ));
        }
        Ok(())
    }

    /// Mean height of `Γ*`.
    pub fn mean_height(&self) -> f64 {
        self.grid.mean(&self.disp[2])
    }

    /// Whether `Γ*` is a horizontal plane (enables direct reference solves).
    pub fn is_flat(&self) -> bool {
        let z0 = self.disp[2][0];
        self.disp[0].iter().chain(&self.disp[1]).all(|x| *x == 0.0) && self.disp[2].iter().all(|z| *z == z0)
    }
}

/// The chart `γ` on `Γ*`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightField {
    pub values: Vec<f64>,
}

impl HeightField {
    pub fn new(grid: &Fourier2, values: Vec<f64>) -> Result<Self> {
        ensure_finite("height field", &values)?;
        if values.len() != grid.np() {
            return Err(PilError::validation("gamma", "length does not match the grid"));
        }
        Ok(HeightField { values })
    }

    pub fn zeros(grid: &Fourier2) -> Self {
        HeightField { values: vec![0.0; grid.np()] }
    }

    /// Unnormalized discrete Fourier coefficients.
    pub fn spectral_coeffs(&self, grid: &Fourier2) -> Vec<C64> {
        grid.forward(&self.values)
    }

    /// Spectral `H^s` norm.
    pub fn sobolev_norm(&self, grid: &Fourier2, s: f64) -> f64 {
        grid.sobolev_norm(&self.values, s)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }
}

/// Per-point geometry of `Γ_t = Φ(Γ*)`.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub grid: Fourier2,
    /// Periodic part of `Φ`: `Φ = (u, v, 0) + disp`.
    pub disp: Vec3Field,
    pub tu: Vec3Field,
    pub tv: Vec3Field,
    pub normal: Vec3Field,
    /// `(g_uu, g_uv, g_vv)`.
    pub metric: Vec3Field,
    /// `(g^uu, g^uv, g^vv)`.
    pub metric_inv: Vec3Field,
    /// `(II_uu, II_uv, II_vv)` with `II_ij = -n·Φ_ij`.
    pub second_form: Vec3Field,
    pub kappa: Vec<f64>,
    /// `√det g`.
    pub area_elem: Vec<f64>,
}

impl SurfaceGeometry {
    /// Physical position of grid point `p`.
    pub fn position(&self, p: usize) -> [f64; 3] {
        let (u, v) = self.grid.coords(p);
        [u + self.disp[0][p], v + self.disp[1][p], self.disp[2][p]]
    }

    /// Total area `∫ dS`.
    pub fn area(&self) -> f64 {
        surface_integral(self, &vec![1.0; self.grid.np()])
    }

    pub fn normal_at(&self, p: usize) -> [f64; 3] {
        at(&self.normal, p)
    }

    /// `min(1 - z, z + 1)` over the interface.
    pub fn wall_gap(&self) -> f64 {
        self.disp[2].iter().map(|z| (1.0 - z).min(z + 1.0)).fold(f64::INFINITY, f64::min)
    }
}

/// Geometry of the interface `Φ = X* + γν`, computed spectrally.
pub fn build_geometry(reference: &ReferenceSurface, gamma: &HeightField) -> Result<SurfaceGeometry> {
    let grid = &reference.grid;
    let np = grid.np();
    ensure_finite("height field", &gamma.values)?;
    if gamma.values.len() != np {
        return Err(PilError::validation("gamma", "length does not match the grid"));
    }
    let m = gamma.max_abs();
    if m >= reference.delta0 {
        return Err(PilError::ChartOverflow { max_abs: m, delta0: reference.delta0 });
    }
    let disp: Vec3Field = std::array::from_fn(|k| {
        (0..np).map(|p| reference.disp[k][p] + gamma.values[p] * reference.nu[k][p]).collect()
    });
    let derivs: Vec<Vec<Vec<f64>>> =
        disp.iter().map(|c| grid.diff_many(c, &[(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])).collect();
    let mut tu: Vec3Field = std::array::from_fn(|k| derivs[k][0].clone());
    let mut tv: Vec3Field = std::array::from_fn(|k| derivs[k][1].clone());
    tu[0].iter_mut().for_each(|x| *x += 1.0);
    tv[1].iter_mut().for_each(|x| *x += 1.0);
    let normal = normals(&tu, &tv);
    let mut metric: Vec3Field = [vec![0.0; np], vec![0.0; np], vec![0.0; np]];
    let mut metric_inv = metric.clone();
    let mut second_form = metric.clone();
    let mut kappa = vec![0.0; np];
    let mut area_elem = vec![0.0; np];
    for p in 0..np {
        let a = at(&tu, p);
        let b = at(&tv, p);
        let (guu, guv, gvv) = (dot(a, a), dot(a, b), dot(b, b));
        let det = guu * gvv - guv * guv;
        if !(det > 0.0) {
            return Err(PilError::DegenerateMetric { det, index: p });
        }
        let n = at(&normal, p);
        let second = |idx: usize| -> f64 { -(n[0] * derivs[0][idx][p] + n[1] * derivs[1][idx][p] + n[2] * derivs[2][idx][p]) };
        let (luu, luv, lvv) = (second(2), second(3), second(4));
        let (iuu, iuv, ivv) = (gvv / det, -guv / det, guu / det);
        metric[0][p] = guu;
        metric[1][p] = guv;
        metric[2][p] = gvv;
        metric_inv[0][p] = iuu;
        metric_inv[1][p] = iuv;
        metric_inv[2][p] = ivv;
        second_form[0][p] = luu;
        second_form[1][p] = luv;
        second_form[2][p] = lvv;
        kappa[p] = iuu * luu + 2.0 * iuv * luv + ivv * lvv;
        area_elem[p] = det.sqrt();
    }
    Ok(SurfaceGeometry { grid: grid.clone(), disp, tu, tv, normal, metric, metric_inv, second_form, kappa, area_elem })
}
