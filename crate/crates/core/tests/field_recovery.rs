use pil::fields::*;
use pil::harmonic::*;
use pil::spectral::{max_abs, Fourier2};
use pil::surface::*;
use std::f64::consts::PI;

fn slab(n: usize, nz: usize, z0: f64) -> Slab {
    let r = ReferenceSurface::flat(Fourier2::new(n, n), z0, 0.4, 0.1).unwrap();
    Slab::new(r, nz, SolverOptions::default()).unwrap()
}

fn geometry(s: &Slab, f: impl Fn(f64, f64) -> f64) -> SurfaceGeometry {
    let g = HeightField::new(&s.reference.grid, s.reference.grid.sample(f)).unwrap();
    build_geometry(&s.reference, &g).unwrap()
}

fn vec_sample(g: &BulkGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> [Vec<f64>; 3] {
    let vals: Vec<[f64; 3]> = (0..g.len()).map(|i| f(g.position(i))).collect();
    std::array::from_fn(|a| vals.iter().map(|v| v[a]).collect())
}

fn r3(v: &[Vec<f64>; 3]) -> [&[f64]; 3] {
    [&v[0], &v[1], &v[2]]
}

fn max_diff3(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

// u = curl(0, 0, ψ) + ∇φ₁ + ∇φ₂ + c with ψ = sin x cos y cosh z,
// φ₁ = cos x cosh(z-1), φ₂ = ½(z-1)² sin y.
fn manufactured(x: [f64; 3]) -> [f64; 3] {
    let (px, py, pz) = (x[0], x[1], x[2]);
    [
        -px.sin() * py.sin() * pz.cosh() - px.sin() * (pz - 1.0).cosh() + 0.3,
        -px.cos() * py.cos() * pz.cosh() + 0.5 * (pz - 1.0).powi(2) * py.cos() - 0.2,
        px.cos() * (pz - 1.0).sinh() + (pz - 1.0) * py.sin(),
    ]
}

fn manufactured_curl(x: [f64; 3]) -> [f64; 3] {
    let (px, py, pz) = (x[0], x[1], x[2]);
    [
        px.cos() * py.cos() * pz.sinh(),
        -px.sin() * py.sin() * pz.sinh(),
        2.0 * px.sin() * py.cos() * pz.cosh(),
    ]
}

fn manufactured_div(x: [f64; 3]) -> f64 {
    x[1].sin() * (1.0 - 0.5 * (x[2] - 1.0).powi(2))
}

#[test]
fn constant_flux_field_on_flat_interface() {
    let s = slab(8, 9, 0.0);
    let geom = geometry(&s, |_, _| 0.0);
    let g = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let n = g.len();
    let z = vec![0.0; n];
    let area = 4.0 * PI * PI;
    let data = DivCurlData { curl: [&z, &z, &z], div: &z, normal_trace: &vec![0.0; g.np()], flux: [0.7 * area, -0.4 * area] };
    let (u, _) = solve_divcurl_plus(&s, &g, &geom, data, GaugeStart::Wall).unwrap();
    assert!(u.comps[0].iter().all(|x| (x - 0.7).abs() < 1e-12));
    assert!(u.comps[1].iter().all(|x| (x + 0.4).abs() < 1e-12));
    assert!(max_abs(&u.comps[2]) < 1e-12);
}

#[test]
fn manufactured_divcurl_on_curved_interface() {
    let s = slab(16, 17, 0.0);
    let geom = geometry(&s, |u, v| 0.06 * u.sin() * v.cos());
    let g = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let exact = vec_sample(&g, manufactured);
    // The analytic curl matches the discrete one.
    let c = g.curl(r3(&exact));
    let f = vec_sample(&g, manufactured_curl);
    assert!(max_diff3(&c, &f) < 1e-8);
    let div = g.sample(manufactured_div);
    let theta = interface_dot_normal(&g, r3(&exact));
    let area = 4.0 * PI * PI;
    let data = DivCurlData { curl: r3(&f), div: &div, normal_trace: &theta, flux: [0.3 * area, -0.2 * area] };
    let (u, rep) = solve_divcurl_plus(&s, &g, &geom, data, GaugeStart::Wall).unwrap();
    let err = max_diff3(&u.comps, &exact);
    assert!(err < 1e-7, "err {err:e} {rep:?}");
    let (u2, _) = solve_divcurl_plus(&s, &g, &geom, data, GaugeStart::Interface).unwrap();
    assert!(max_diff3(&u.comps, &u2.comps) < 1e-9);
}

#[test]
fn incompatible_normal_trace_is_rejected() {
    let s = slab(8, 9, 0.0);
    let geom = geometry(&s, |u, _| 0.05 * u.cos());
    let g = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let z = vec![0.0; g.len()];
    let theta = vec![0.1; g.np()];
    let data = DivCurlData { curl: [&z, &z, &z], div: &z, normal_trace: &theta, flux: [0.0, 0.0] };
    assert!(matches!(solve_divcurl_plus(&s, &g, &geom, data, GaugeStart::Wall), Err(pil::PilError::IncompatibleData { .. })));
}

#[test]
fn vacuum_field_oracles() {
    let z0 = 0.1;
    let s = slab(16, 21, z0);
    let geom = geometry(&s, |_, _| 0.0);
    let g = s.harmonic_coordinates(&geom, Side::Minus).unwrap();
    let grid = &s.reference.grid;
    let zero = solve_vacuum_field(&s, &g, &SurfaceCurrent::zeros(grid)).unwrap();
    assert!(zero.max_norm() == 0.0);

    let c = solve_vacuum_field(&s, &g, &SurfaceCurrent::constant(grid, [0.4, -0.3])).unwrap();
    assert!(c.comps[0].iter().all(|x| (x - 0.3).abs() < 1e-12));
    assert!(c.comps[1].iter().all(|x| (x - 0.4).abs() < 1e-12));
    assert!(max_abs(&c.comps[2]) < 1e-12);

    // Ĵ = (sin v, 0): ψ = -cos y cosh(z - z0) / cosh(1 + z0).
    let j = SurfaceCurrent::new(grid, grid.sample(|_, v| v.sin()), vec![0.0; grid.np()]).unwrap();
    let h = solve_vacuum_field(&s, &g, &j).unwrap();
    let d = (1.0 + z0).cosh();
    let exact = vec_sample(&g, |x| [0.0, x[1].sin() * (x[2] - z0).cosh() / d, -x[1].cos() * (x[2] - z0).sinh() / d]);
    assert!(max_diff3(&h.comps, &exact) < 1e-10);
    let h2 = solve_vacuum_field(&s, &g, &j.scaled(-2.5)).unwrap();
    let scaled: Vec<Vec<f64>> = h.comps.iter().map(|c| c.iter().map(|x| -2.5 * x).collect()).collect();
    assert!(max_diff3(&h2.comps, &scaled) < 1e-12);
}

#[test]
fn vacuum_field_on_curved_interface_meets_conditions() {
    let s = slab(16, 17, 0.0);
    let geom = geometry(&s, |u, v| 0.05 * (u + v).sin());
    let g = s.harmonic_coordinates(&geom, Side::Minus).unwrap();
    let grid = &s.reference.grid;
    let j1 = grid.sample(|u, v| 0.5 + 0.2 * v.sin() + 0.1 * (u - v).cos());
    let j2 = grid.sample(|u, v| -0.3 + 0.1 * (u - v).cos());
    let j = SurfaceCurrent::new(grid, j1.clone(), j2.clone()).unwrap();
    let h = solve_vacuum_field(&s, &g, &j).unwrap();
    let hv = h.to_vec3();
    assert!(max_abs(&g.div(r3(&hv))) < 1e-8);
    assert!(g.curl(r3(&hv)).iter().all(|c| max_abs(c) < 1e-8));
    assert!(max_abs(&interface_dot_normal(&g, r3(&hv))) < 1e-8);
    let wall = g.wall_trace(&hv[1]);
    assert!(wall.iter().zip(&j1).all(|(a, b)| (a - b).abs() < 1e-10));
    let wall = g.wall_trace(&hv[0]);
    assert!(wall.iter().zip(&j2).all(|(a, b)| (a + b).abs() < 1e-10));
    let bad = SurfaceCurrent::new(grid, grid.sample(|u, _| u.sin()), vec![0.0; grid.np()]).unwrap();
    assert!(solve_vacuum_field(&s, &g, &bad).is_err());
}

#[test]
fn vacuum_time_derivative_oracles() {
    let s = slab(8, 9, 0.0);
    let geom = geometry(&s, |_, _| 0.0);
    let gp = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let gm = s.harmonic_coordinates(&geom, Side::Minus).unwrap();
    let grid = &s.reference.grid;
    let j0 = SurfaceCurrent::constant(grid, [0.2, 0.1]);
    let hhat = solve_vacuum_field(&s, &gm, &j0).unwrap().to_vec3();
    let zero_v = [vec![0.0; gp.len()], vec![0.0; gp.len()], vec![0.0; gp.len()]];
    let (dh, _) = solve_time_derivative_vacuum(&s, &gp, &gm, &geom, r3(&zero_v), r3(&hhat), &SurfaceCurrent::zeros(grid)).unwrap();
    assert!(dh.max_norm() < 1e-14);
    // Rigid tangential translation.
    let vc = [vec![0.3; gp.len()], vec![-0.1; gp.len()], vec![0.0; gp.len()]];
    let (dh, _) = solve_time_derivative_vacuum(&s, &gp, &gm, &geom, r3(&vc), r3(&hhat), &SurfaceCurrent::zeros(grid)).unwrap();
    assert!(dh.max_norm() < 1e-13);
    // Ramped current: ∂tĥ solves the static problem for J₀.
    let j1 = SurfaceCurrent::new(grid, grid.sample(|_, v| v.cos()), vec![0.1; grid.np()]).unwrap();
    let (dh, _) = solve_time_derivative_vacuum(&s, &gp, &gm, &geom, r3(&zero_v), r3(&hhat), &j1).unwrap();
    let direct = solve_vacuum_field(&s, &gm, &j1).unwrap();
    assert!(max_diff3(&dh.comps, &direct.comps) < 1e-12);
}

#[test]
fn pressure_oracles() {
    let s = slab(8, 13, 0.0);
    let geom = geometry(&s, |u, _| 0.04 * u.cos());
    let g = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let n = g.len();
    let np = g.np();
    let zero = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let hc: Vec3Field = [vec![0.3; np], vec![0.4; np], vec![0.0; np]];
    let parts = pressure_decomposition(&s, &g, &geom, r3(&zero), r3(&zero), &hc, 0.0).unwrap();
    assert!(max_abs(&parts.q) == 0.0);
    assert!(parts.p_total.iter().all(|p| (p - 0.125).abs() < 1e-10));

    let v = vec_sample(&g, |x| [x[1].sin() * x[2], x[0].cos(), 0.1 * x[1].cos()]);
    let parts = pressure_decomposition(&s, &g, &geom, r3(&v), r3(&v), &hc, 0.7).unwrap();
    assert!(max_abs(&parts.q) < 1e-12);
    let tr: Vec<f64> = (0..np).map(|p| 0.49 * geom.kappa[p] + 0.125).collect();
    assert!(parts.trace.iter().zip(&tr).all(|(a, b)| (a - b).abs() < 1e-10));

    // Shear flow on a flat interface.
    let s2 = slab(8, 13, 0.0);
    let flat = geometry(&s2, |_, _| 0.0);
    let g2 = s2.harmonic_coordinates(&flat, Side::Plus).unwrap();
    let shear = vec_sample(&g2, |x| [x[2].sin(), 0.0, 0.0]);
    let z2 = [vec![0.0; g2.len()], vec![0.0; g2.len()], vec![0.0; g2.len()]];
    let zc: Vec3Field = [vec![0.0; np], vec![0.0; np], vec![0.0; np]];
    let parts = pressure_decomposition(&s2, &g2, &flat, r3(&shear), r3(&z2), &zc, 1.0).unwrap();
    assert!(max_abs(&parts.q) < 1e-13);
    assert!(max_abs(&parts.p_total) < 1e-13);

    // Exchange symmetry and single-solve consistency.
    let h = vec_sample(&g, |x| [0.2, x[0].sin() * 0.3, 0.1 * x[2]]);
    let a = pressure_decomposition(&s, &g, &geom, r3(&v), r3(&h), &hc, 0.5).unwrap();
    let b = pressure_decomposition(&s, &g, &geom, r3(&h), r3(&v), &hc, 0.5).unwrap();
    assert!(a.p_vv.iter().zip(&b.p_hh).all(|(x, y)| (x - y).abs() < 1e-13));
    let total = pressure_total(&s, &g, &geom, r3(&v), r3(&h), &hc, 0.5).unwrap();
    assert!(total.iter().zip(&a.p_total).all(|(x, y)| (x - y).abs() < 1e-9));
}

#[test]
fn rt_indicator_and_w_residual() {
    let s = slab(8, 9, 0.0);
    let geom = geometry(&s, |_, _| 0.0);
    let g = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    assert!(rt_indicator(&g, &vec![0.0; g.len()]).iter().all(|x| *x == 0.0));
    // With n = -e_z, 𝔱 = -n·∇p = ∂_z p.
    let p = g.sample(|x| 2.0 - 0.7 * x[2]);
    assert!(rt_indicator(&g, &p).iter().all(|x| (x + 0.7).abs() < 1e-12));

    let h = vec_sample(&g, |x| [x[1].sin(), 0.0, 0.0]);
    let dtv = vec_sample(&g, |x| [x[2], 0.0, x[0].cos()]);
    let w1 = w_residual(&g, &p, r3(&h), r3(&dtv));
    let shifted: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
    let w2 = w_residual(&g, &shifted, r3(&h), r3(&dtv));
    assert!(max_diff3(&w1.w.comps, &w2.w.comps) < 1e-13);
}

#[test]
fn leray_projection_restores_constraints() {
    let s = slab(12, 13, 0.0);
    let geom = geometry(&s, |u, v| 0.05 * (u - v).cos());
    let g = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let u = vec_sample(&g, |x| [x[0].sin() * x[2], x[1].cos(), 0.2 * (x[0] + x[2]).sin()]);
    let target = vec![0.0; g.np()];
    let (p, corr) = leray_project(&s, &g, &geom, r3(&u), &target).unwrap();
    assert_eq!(corr, 0.0);
    assert!(max_abs(&g.div(r3(&p))) < 1e-7);
    assert!(max_abs(&interface_dot_normal(&g, r3(&p))) < 1e-9);
    assert!(wall_normal_max(&g, r3(&p)) < 1e-9);
}
