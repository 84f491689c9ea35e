//! Recover a field on the plasma side from its curl, divergence, normal
//! trace and wall fluxes, and compare with the manufactured solution.

use pil::fields::{interface_dot_normal, solve_divcurl_plus, DivCurlData, GaugeStart};
use pil::harmonic::{Side, Slab, SolverOptions};
use pil::spectral::Fourier2;
use pil::surface::{build_geometry, HeightField, ReferenceSurface};
use std::f64::consts::PI;

fn exact(x: [f64; 3]) -> [f64; 3] {
    let (a, b, z) = (x[0], x[1], x[2]);
    [
        -a.sin() * b.sin() * z.cosh() - a.sin() * (z - 1.0).cosh() + 0.3,
        -a.cos() * b.cos() * z.cosh() + 0.5 * (z - 1.0).powi(2) * b.cos() - 0.2,
        a.cos() * (z - 1.0).sinh() + (z - 1.0) * b.sin(),
    ]
}

fn main() -> pil::Result<()> {
    println!("{:>4} {:>4} {:>12} {:>12}", "N", "nz", "max error", "gauge diff");
    for (n, nz) in [(8, 9), (12, 13), (16, 17)] {
        let reference = ReferenceSurface::flat(Fourier2::new(n, n), 0.0, 0.4, 0.1)?;
        let slab = Slab::new(reference, nz, SolverOptions::default())?;
        let grid = &slab.reference.grid;
        let geom = build_geometry(&slab.reference, &HeightField::new(grid, grid.sample(|u, v| 0.06 * u.sin() * v.cos()))?)?;
        let g = slab.harmonic_coordinates(&geom, Side::Plus)?;
        let pts: Vec<[f64; 3]> = (0..g.len()).map(|i| exact(g.position(i))).collect();
        let u: [Vec<f64>; 3] = std::array::from_fn(|a| pts.iter().map(|p| p[a]).collect());
        let refs = [&u[0][..], &u[1][..], &u[2][..]];
        let curl = g.curl(refs);
        let div = g.div(refs);
        let theta = interface_dot_normal(&g, refs);
        let area = 4.0 * PI * PI;
        let data = DivCurlData {
            curl: [&curl[0], &curl[1], &curl[2]],
            div: &div,
            normal_trace: &theta,
            flux: [0.3 * area, -0.2 * area],
        };
        let (a, _) = solve_divcurl_plus(&slab, &g, &geom, data, GaugeStart::Wall)?;
        let (b, _) = solve_divcurl_plus(&slab, &g, &geom, data, GaugeStart::Interface)?;
        let diff = |x: &[Vec<f64>], y: &[Vec<f64>]| {
            x.iter().zip(y).flat_map(|(p, q)| p.iter().zip(q).map(|(s, t)| (s - t).abs())).fold(0.0, f64::max)
        };
        println!("{n:>4} {nz:>4} {:>12.3e} {:>12.3e}", diff(&a.comps, &u), diff(&a.comps, &b.comps));
    }
    Ok(())
}
