//! Mapped product grids `T² × [-1, 1] → Ω^±` and bulk differential operators.
//!
//! Computational coordinates are `ξ = (u, v, s)`. A grid stores the physical
//! position `x(ξ) = (u, v, 0) + disp(ξ)` together with the inverse Jacobian,
//! the contravariant metric `G^{kl} = ∇ξ^k·∇ξ^l` and `Δξ^k`, so that
//! `Δf = G^{kl}∂_k∂_l f + (Δξ^k)∂_k f`.

use crate::chebyshev::Cheb;
use crate::error::{PilError, Result};
use crate::spectral::Fourier2;
use crate::surface::Vec3Field;

/// Which side of the interface a bulk grid covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Plasma region between `Γ_t` and the top wall `z = 1`.
    Plus,
    /// Vacuum region between the bottom wall `z = -1` and `Γ_t`.
    Minus,
}

impl Side {
    /// Plane index of the interface (`s = -1` for plus, `s = +1` for minus).
    pub fn interface_plane(self, nz: usize) -> usize {
        match self {
            Side::Plus => nz - 1,
            Side::Minus => 0,
        }
    }

    pub fn wall_plane(self, nz: usize) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => nz - 1,
        }
    }

    pub fn wall_z(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    /// Fraction of the way from the interface to the wall at `s`.
    pub fn wall_fraction(self, s: f64) -> f64 {
        match self {
            Side::Plus => 0.5 * (1.0 + s),
            Side::Minus => 0.5 * (1.0 - s),
        }
    }

    /// Sign turning the interface normal `n` into the region's outward normal.
    pub fn outward_sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Scalar or vector samples on a bulk grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BulkField {
    pub side: Side,
    pub comps: Vec<Vec<f64>>,
}

impl BulkField {
    pub fn scalar(side: Side, values: Vec<f64>) -> Self {
        BulkField { side, comps: vec![values] }
    }

    pub fn vector(side: Side, comps: [Vec<f64>; 3]) -> Self {
        let [a, b, c] = comps;
        BulkField { side, comps: vec![a, b, c] }
    }

    pub fn zeros(side: Side, ncomp: usize, len: usize) -> Self {
        BulkField { side, comps: vec![vec![0.0; len]; ncomp] }
    }

    pub fn as_vec3(&self) -> [&[f64]; 3] {
        [&self.comps[0], &self.comps[1], &self.comps[2]]
    }

    pub fn to_vec3(&self) -> [Vec<f64>; 3] {
        [self.comps[0].clone(), self.comps[1].clone(), self.comps[2].clone()]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        let n = self.comps[0].len();
        (0..n)
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// A product grid mapped into one side of the slab.
#[derive(Clone, Debug)]
pub struct BulkGrid {
    pub side: Side,
    pub grid: Fourier2,
    pub cheb: Cheb,
    pub nz: usize,
    /// `x = (u, v, 0) + disp`.
    pub disp: Vec3Field,
    /// `∂ξ^k/∂x_a` stored at index `3k + a`.
    pub jinv: [Vec<f64>; 9],
    /// `det(∂x/∂ξ)`.
    pub jdet: Vec<f64>,
    /// `(G^uu, G^uv, G^us, G^vv, G^vs, G^ss)`.
    pub metric: [Vec<f64>; 6],
    /// `Δ_x ξ^k`.
    pub first: [Vec<f64>; 3],
    /// Interface unit normal `n` (into the vacuum), one value per column.
    pub interface_normal: Vec3Field,
    /// Thickness of the matching flat slab used by the preconditioner.
    pub flat_thickness: f64,
}

/// First and second computational derivatives of a scalar.
pub(crate) struct Derivs {
    pub d1: [Vec<f64>; 3],
    /// `(uu, uv, us, vv, vs, ss)`.
    pub d2: [Vec<f64>; 6],
}

impl BulkGrid {
    /// Build grid data from a displacement field, failing on folded maps.
    pub fn from_disp(
        side: Side,
        grid: Fourier2,
        cheb: Cheb,
        disp: Vec3Field,
        interface_normal: Vec3Field,
        flat_thickness: f64,
    ) -> Result<Self> {
        let nz = cheb.n;
        let np = grid.np();
        let n = nz * np;
        let mut jac: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
        for a in 0..3 {
            let (du, dv) = grid.grad(&disp[a]);
            let ds = cheb.ds(&disp[a], np);
            jac[3 * a] = du;
            jac[3 * a + 1] = dv;
            jac[3 * a + 2] = ds;
        }
        jac[0].iter_mut().for_each(|x| *x += 1.0);
        jac[4].iter_mut().for_each(|x| *x += 1.0);
        let mut jinv: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; n]);
        let mut jdet = vec![0.0; n];
        for i in 0..n {
            let m = |a: usize, k: usize| jac[3 * a + k][i];
            let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
            if !(det > 0.0) {
                return Err(PilError::FoldedMap { det, index: i });
            }
            jdet[i] = det;
            // inverse: (J^{-1})_{k a}
            let cof = |r: usize, c: usize| -> f64 {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)
            };
            for k in 0..3 {
                for a in 0..3 {
                    jinv[3 * k + a][i] = cof(a, k) / det;
                }
            }
        }
        let mut metric: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
        let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for (idx, &(k, l)) in pairs.iter().enumerate() {
            for i in 0..n {
                metric[idx][i] = (0..3).map(|a| jinv[3 * k + a][i] * jinv[3 * l + a][i]).sum();
            }
        }
        let mut g = BulkGrid {
            side,
            grid,
            cheb,
            nz,
            disp,
            jinv,
            jdet,
            metric,
            first: std::array::from_fn(|_| vec![0.0; n]),
            interface_normal,
            flat_thickness,
        };
        // Δξ^k = Σ_a ∂_a (∂ξ^k/∂x_a)
        let mut first: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
        for k in 0..3 {
            for a in 0..3 {
                let d = g.dxi(&g.jinv[3 * k + a]);
                for i in 0..n {
                    first[k][i] += g.jinv[a][i] * d[0][i] + g.jinv[3 + a][i] * d[1][i] + g.jinv[6 + a][i] * d[2][i];
                }
            }
        }
        g.first = first;
        Ok(g)
    }

    #[inline]
    pub fn np(&self) -> usize {
        self.grid.np()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nz * self.grid.np()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interface_plane(&self) -> usize {
        self.side.interface_plane(self.nz)
    }

    pub fn wall_plane(&self) -> usize {
        self.side.wall_plane(self.nz)
    }

    /// Physical position of bulk point `i`.
    pub fn position(&self, i: usize) -> [f64; 3] {
        let (u, v) = self.grid.coords(i % self.np());
        [u + self.disp[0][i], v + self.disp[1][i], self.disp[2][i]]
    }

    /// Sample a function of physical position.
    pub fn sample<F: Fn([f64; 3]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.position(i))).collect()
    }

    /// Values of a bulk scalar on plane `k`.
    pub fn plane<'a>(&self, f: &'a [f64], k: usize) -> &'a [f64] {
        &f[k * self.np()..(k + 1) * self.np()]
    }

    pub fn interface_trace(&self, f: &[f64]) -> Vec<f64> {
        self.plane(f, self.interface_plane()).to_vec()
    }

    pub fn wall_trace(&self, f: &[f64]) -> Vec<f64> {
        self.plane(f, self.wall_plane()).to_vec()
    }

    /// Computational gradient `(∂u, ∂v, ∂s)`.
    pub fn dxi(&self, f: &[f64]) -> [Vec<f64>; 3] {
        let (du, dv) = self.grid.grad(f);
        let ds = self.cheb.ds(f, self.np());
        [du, dv, ds]
    }

    pub(crate) fn derivs(&self, f: &[f64]) -> Derivs {
        let np = self.np();
        let mut h = self.grid.diff_many(f, &[(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        let vv = h.pop().unwrap();
        let uv = h.pop().unwrap();
        let uu = h.pop().unwrap();
        let dv = h.pop().unwrap();
        let du = h.pop().unwrap();
        let ds = self.cheb.ds(f, np);
        let ss = self.cheb.dss(f, np);
        let us = self.cheb.ds(&du, np);
        let vs = self.cheb.ds(&dv, np);
        Derivs { d1: [du, dv, ds], d2: [uu, uv, us, vv, vs, ss] }
    }

    /// Physical gradient `∂_a f = Σ_k (∂ξ^k/∂x_a) ∂_k f`.
    pub fn grad(&self, f: &[f64]) -> [Vec<f64>; 3] {
        let d = self.dxi(f);
        self.chain(&d)
    }

    pub(crate) fn chain(&self, d: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        let n = self.len();
        std::array::from_fn(|a| {
            (0..n)
                .map(|i| self.jinv[a][i] * d[0][i] + self.jinv[3 + a][i] * d[1][i] + self.jinv[6 + a][i] * d[2][i])
                .collect()
        })
    }

    /// Physical Laplacian in metric form.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let d = self.derivs(f);
        self.laplacian_from(&d)
    }

    pub(crate) fn laplacian_from(&self, d: &Derivs) -> Vec<f64> {
        let m = &self.metric;
        let w = &self.first;
        (0..self.len())
            .map(|i| {
                m[0][i] * d.d2[0][i]
                    + 2.0 * m[1][i] * d.d2[1][i]
                    + 2.0 * m[2][i] * d.d2[2][i]
                    + m[3][i] * d.d2[3][i]
                    + 2.0 * m[4][i] * d.d2[4][i]
                    + m[5][i] * d.d2[5][i]
                    + w[0][i] * d.d1[0][i]
                    + w[1][i] * d.d1[1][i]
                    + w[2][i] * d.d1[2][i]
            })
            .collect()
    }

    /// Jacobian `∂_a X_b`, indexed `[a][b]`.
    pub fn jacobian(&self, x: [&[f64]; 3]) -> [[Vec<f64>; 3]; 3] {
        let g: Vec<[Vec<f64>; 3]> = x.iter().map(|c| self.grad(c)).collect();
        std::array::from_fn(|a| std::array::from_fn(|b| g[b][a].clone()))
    }

    pub fn div(&self, x: [&[f64]; 3]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for b in 0..3 {
            let g = self.grad(x[b]);
            for i in 0..n {
                out[i] += g[b][i];
            }
        }
        out
    }

    pub fn curl(&self, x: [&[f64]; 3]) -> [Vec<f64>; 3] {
        let g: Vec<[Vec<f64>; 3]> = x.iter().map(|c| self.grad(c)).collect();
        let n = self.len();
        // g[b][a] = ∂_a X_b
        [
            (0..n).map(|i| g[2][1][i] - g[1][2][i]).collect(),
            (0..n).map(|i| g[0][2][i] - g[2][0][i]).collect(),
            (0..n).map(|i| g[1][0][i] - g[0][1][i]).collect(),
        ]
    }

    /// `(a·∇) X` for vector `X`.
    pub fn advect(&self, a: [&[f64]; 3], x: [&[f64]; 3]) -> [Vec<f64>; 3] {
        let n = self.len();
        std::array::from_fn(|b| {
            let g = self.grad(x[b]);
            (0..n).map(|i| a[0][i] * g[0][i] + a[1][i] * g[1][i] + a[2][i] * g[2][i]).collect()
        })
    }

    /// Outward normal of the region at the interface plane, per column.
    pub fn interface_outward(&self, p: usize) -> [f64; 3] {
        let s = self.side.outward_sign();
        [s * self.interface_normal[0][p], s * self.interface_normal[1][p], s * self.interface_normal[2][p]]
    }

    /// `n_out · ∇f` on the interface plane.
    pub fn interface_normal_derivative(&self, f: &[f64]) -> Vec<f64> {
        let g = self.grad(f);
        let off = self.interface_plane() * self.np();
        (0..self.np())
            .map(|p| {
                let n = self.interface_outward(p);
                n[0] * g[0][off + p] + n[1] * g[1][off + p] + n[2] * g[2][off + p]
            })
            .collect()
    }

    /// `n · ∇f` on the interface with `n` the interface normal (into the vacuum).
    pub fn interface_n_derivative(&self, f: &[f64]) -> Vec<f64> {
        let s = self.side.outward_sign();
        self.interface_normal_derivative(f).into_iter().map(|x| s * x).collect()
    }

    /// Quadrature weight of bulk point `i` (`dx = det J du dv ds`).
    pub fn weight(&self, i: usize) -> f64 {
        let kz = i / self.np();
        self.cheb.w[kz] * self.grid.du() * self.grid.dv() * self.jdet[i]
    }

    /// `∫ f dx`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        (0..self.len()).map(|i| f[i] * self.weight(i)).sum()
    }

    /// Maximum of `|f|` over the interior planes and both boundary planes.
    pub fn max_abs(&self, f: &[f64]) -> f64 {
        f.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Linear-in-`s` displacement of the reference slab between a surface
    /// displacement (at the interface) and the flat wall.
    pub fn stretch_disp(side: Side, grid: &Fourier2, cheb: &Cheb, surf: &Vec3Field) -> Vec3Field {
        let np = grid.np();
        let nz = cheb.n;
        let wall = [0.0, 0.0, side.wall_z()];
        std::array::from_fn(|a| {
            let mut out = vec![0.0; nz * np];
            for k in 0..nz {
                let t = side.wall_fraction(cheb.s[k]);
                for p in 0..np {
                    out[k * np + p] = surf[a][p] + t * (wall[a] - surf[a][p]);
                }
            }
            out
        })
    }
}
