//! Bulk elliptic machinery: harmonic coordinates over the fixed reference
//! slab, harmonic extensions, Poisson solves and Dirichlet–Neumann operators.
//!
//! A [`Slab`] owns the reference surface, the vertical Chebyshev grid, the
//! reference product grids of both sides and the flat-slab preconditioners.
//! Physical grids for an interface come from [`Slab::harmonic_coordinates`].

mod dn;
mod grid;
mod solver;

pub use dn::{sobolev_half_form, DNOperator, FractionalPowers};
pub use grid::{BulkField, BulkGrid, Side};
pub use solver::{gmres, Bc, BcKind, EllipticSolution, FlatInverse, GmresReport, SolverOptions};

use crate::chebyshev::Cheb;
use crate::error::{PilError, Result};
use crate::surface::{ReferenceSurface, SurfaceGeometry, Vec3Field};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Tolerances for operator checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub dn: f64,
    pub eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { dn: 1e-8, eig: 1e-9 }
    }
}

type FlatKey = (Side, BcKind, BcKind);

/// Shared solver context for one reference surface and vertical resolution.
#[derive(Debug)]
pub struct Slab {
    pub reference: ReferenceSurface,
    pub cheb: Cheb,
    pub opts: SolverOptions,
    pub tol: Tolerances,
    reference_plus: BulkGrid,
    reference_minus: BulkGrid,
    flat: Mutex<HashMap<FlatKey, Arc<FlatInverse>>>,
    dn_cache: Mutex<Vec<(u64, Side, Arc<DNOperator>)>>,
}

const DN_CACHE_LEN: usize = 4;

impl Slab {
    pub fn new(reference: ReferenceSurface, nz: usize, opts: SolverOptions) -> Result<Self> {
        if nz < 5 {
            return Err(PilError::validation("resolution.nz", "need at least 5 vertical points"));
        }
        let cheb = Cheb::new(nz);
        let zbar = reference.mean_height();
        let build = |side: Side| -> Result<BulkGrid> {
            let disp = BulkGrid::stretch_disp(side, &reference.grid, &cheb, &reference.disp);
            let thickness = match side {
                Side::Plus => 1.0 - zbar,
                Side::Minus => 1.0 + zbar,
            };
            BulkGrid::from_disp(side, reference.grid.clone(), cheb.clone(), disp, reference.n_star.clone(), thickness)
        };
        let reference_plus = build(Side::Plus)?;
        let reference_minus = build(Side::Minus)?;
        Ok(Slab {
            reference,
            cheb,
            opts,
            tol: Tolerances::default(),
            reference_plus,
            reference_minus,
            flat: Mutex::new(HashMap::new()),
            dn_cache: Mutex::new(Vec::new()),
        })
    }

    pub fn nz(&self) -> usize {
        self.cheb.n
    }

    pub fn reference_grid(&self, side: Side) -> &BulkGrid {
        match side {
            Side::Plus => &self.reference_plus,
            Side::Minus => &self.reference_minus,
        }
    }

    /// Flat-slab preconditioner for a side and boundary-condition pattern.
    pub fn flat_inverse(&self, side: Side, iface: BcKind, wall: BcKind) -> Result<Arc<FlatInverse>> {
        let key = (side, iface, wall);
        if let Some(f) = self.flat.lock().expect("flat cache poisoned").get(&key) {
            return Ok(f.clone());
        }
        let g = self.reference_grid(side);
        let inv = Arc::new(FlatInverse::new(&g.grid, &self.cheb, side, g.flat_thickness, iface, wall)?);
        self.flat.lock().expect("flat cache poisoned").insert(key, inv.clone());
        Ok(inv)
    }

    /// Solve `Δf = source` on `grid` with interface and wall data.
    pub fn solve(&self, grid: &BulkGrid, source: &[f64], iface: &Bc, wall: &Bc) -> Result<EllipticSolution> {
        let pre = self.flat_inverse(grid.side, iface.kind(), wall.kind())?;
        solver::solve_with(grid, &pre, source, iface, wall, self.opts)
    }

    /// Harmonic coordinates: the physical grid whose interface plane is `Γ_t`
    /// and whose wall plane is the flat wall, with displacement harmonic over
    /// the reference slab.
    pub fn harmonic_coordinates(&self, geom: &SurfaceGeometry, side: Side) -> Result<BulkGrid> {
        if geom.wall_gap() < self.reference.c0 {
            return Err(PilError::validation(
                "gamma",
                format!("interface within {:.4} of a wall, below c0 = {}", geom.wall_gap(), self.reference.c0),
            ));
        }
        let rg = self.reference_grid(side);
        let np = rg.np();
        let n = rg.len();
        let mut disp = rg.disp.clone();
        let zero = Bc::Dirichlet(vec![0.0; np]);
        for k in 0..3 {
            let data: Vec<f64> = (0..np).map(|p| geom.disp[k][p] - self.reference.disp[k][p]).collect();
            if data.iter().all(|x| *x == 0.0) {
                continue;
            }
            let sol = self.solve(rg, &vec![0.0; n], &Bc::Dirichlet(data), &zero)?;
            for (d, y) in disp[k].iter_mut().zip(&sol.values) {
                *d += y;
            }
        }
        let normal: Vec3Field = geom.normal.clone();
        BulkGrid::from_disp(side, rg.grid.clone(), self.cheb.clone(), disp, normal, rg.flat_thickness)
    }

    /// Harmonic extension of `f` with zero Neumann data on the wall.
    pub fn harmonic_extend(&self, grid: &BulkGrid, f: &[f64]) -> Result<BulkField> {
        let np = grid.np();
        let sol = self.solve(grid, &vec![0.0; grid.len()], &Bc::Dirichlet(f.to_vec()), &Bc::zero_neumann(np))?;
        Ok(BulkField::scalar(grid.side, sol.values))
    }

    /// `Δu = source` with Dirichlet data on `Γ_t` and Neumann data (outward)
    /// on the wall; `None` means zero Neumann.
    pub fn poisson_bulk(&self, grid: &BulkGrid, source: &BulkField, dirichlet: &[f64], wall_neumann: Option<&[f64]>) -> Result<BulkField> {
        if source.side != grid.side {
            return Err(PilError::validation("source", "side tag does not match the grid"));
        }
        let np = grid.np();
        let wall = Bc::Neumann(wall_neumann.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; np]));
        let sol = self.solve(grid, &source.comps[0], &Bc::Dirichlet(dirichlet.to_vec()), &wall)?;
        Ok(BulkField::scalar(grid.side, sol.values))
    }

    /// Pure-Neumann solve; the defect is checked against `tol` and reported
    /// as `IncompatibleData` when larger.
    pub fn solve_neumann(&self, grid: &BulkGrid, source: &[f64], iface: &[f64], wall: &[f64], tol: f64) -> Result<EllipticSolution> {
        let sol = self.solve(grid, source, &Bc::Neumann(iface.to_vec()), &Bc::Neumann(wall.to_vec()))?;
        if sol.defect.abs() > tol {
            return Err(PilError::IncompatibleData { detail: format!("Neumann compatibility defect {:.3e}", sol.defect) });
        }
        Ok(sol)
    }

    /// `𝒩f`: outward normal derivative of the harmonic extension. On the plus
    /// side this is `n·∇H₊f`, on the minus side `-n·∇H₋f`.
    pub fn dn_apply(&self, grid: &BulkGrid, f: &[f64]) -> Result<Vec<f64>> {
        let ext = self.harmonic_extend(grid, f)?;
        Ok(grid.interface_normal_derivative(&ext.comps[0]))
    }

    /// Dense DN matrix, one extension per grid point, in parallel.
    pub fn dn_assemble(&self, grid: &BulkGrid, geom: &SurfaceGeometry) -> Result<DNOperator> {
        let np = grid.np();
        let cols: Vec<Vec<f64>> = (0..np)
            .into_par_iter()
            .map(|q| {
                let mut e = vec![0.0; np];
                e[q] = 1.0;
                self.dn_apply(grid, &e)
            })
            .collect::<Result<_>>()?;
        DNOperator::from_columns(grid.side, geom, &cols, self.tol)
    }

    /// Assembled DN operator, cached on the interface position.
    pub fn dn_operator(&self, grid: &BulkGrid, geom: &SurfaceGeometry) -> Result<Arc<DNOperator>> {
        let key = geometry_hash(geom);
        {
            let cache = self.dn_cache.lock().expect("dn cache poisoned");
            if let Some((_, _, op)) = cache.iter().find(|(k, s, _)| *k == key && *s == grid.side) {
                return Ok(op.clone());
            }
        }
        let op = Arc::new(self.dn_assemble(grid, geom)?);
        let mut cache = self.dn_cache.lock().expect("dn cache poisoned");
        if cache.len() >= DN_CACHE_LEN {
            cache.remove(0);
        }
        cache.push((key, grid.side, op.clone()));
        Ok(op)
    }
}

fn geometry_hash(geom: &SurfaceGeometry) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for c in &geom.disp {
        for x in c {
            x.to_bits().hash(&mut h);
        }
    }
    h.finish()
}
