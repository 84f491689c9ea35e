//! Dirichlet–Neumann spectra: the flat slab against `|k| tanh(|k| d)`, then
//! a curved interface.

use pil::harmonic::{Side, Slab, SolverOptions};
use pil::spectral::Fourier2;
use pil::surface::{build_geometry, HeightField, ReferenceSurface};

fn main() -> pil::Result<()> {
    let (n, z0) = (16, 0.3);
    let reference = ReferenceSurface::flat(Fourier2::new(n, n), z0, 0.4, 0.1)?;
    let slab = Slab::new(reference, 17, SolverOptions::default())?;
    let grid = slab.reference.grid.clone();
    let flat = build_geometry(&slab.reference, &HeightField::zeros(&grid))?;
    for side in [Side::Plus, Side::Minus] {
        let d = if side == Side::Plus { 1.0 - z0 } else { 1.0 + z0 };
        let dn = slab.dn_operator(&slab.harmonic_coordinates(&flat, side)?, &flat)?;
        let mut symbol: Vec<f64> = (0..grid.np())
            .map(|p| {
                let k = grid.ku(p / grid.nv).hypot(grid.kv(p % grid.nv));
                k * (k * d).tanh()
            })
            .collect();
        symbol.sort_by(f64::total_cmp);
        let worst = dn.eigenvalues.iter().zip(&symbol).map(|(l, s)| (l - s).abs() / s.max(1.0)).fold(0.0, f64::max);
        println!("{side:?}: first eigenvalues {:?}", dn.eigenvalues[..5].iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>());
        println!("{side:?}: max relative deviation from the symbol {worst:.2e}");
    }

    let g = HeightField::new(&grid, grid.sample(|u, v| 0.05 * (u - v).cos()))?;
    let geom = build_geometry(&slab.reference, &g)?;
    let dn = slab.dn_operator(&slab.harmonic_coordinates(&geom, Side::Plus)?, &geom)?;
    println!(
        "curved: λ1 = {:.6}, symmetry defect {:.2e}, kernel dim {}",
        dn.eigenvalues[1],
        dn.symmetry_defect,
        dn.numerical_kernel_dim(1e-9)
    );
    Ok(())
}
