mod common;

use common::*;
use pil::diagnostics::*;
use pil::error::PilError;
use pil::evolution::*;
use pil::fields::SurfaceCurrent;
use pil::harmonic::{DNOperator, FractionalPowers, Side};
use pil::spectral::max_abs;
use pil::surface::{build_geometry, HeightField, SurfaceGeometry};
use proptest::prelude::*;
use std::f64::consts::PI;

fn quad_form(h: [f64; 2], hh: [f64; 2], th: f64) -> f64 {
    let a = [th.cos(), th.sin()];
    (a[0] * h[0] + a[1] * h[1]).powi(2) + (a[0] * hh[0] + a[1] * hh[1]).powi(2)
}

/// Minimum over 360 sampled directions, refined by golden-section search
/// around the best sample.
fn upsilon_brute(h: [f64; 2], hh: [f64; 2]) -> f64 {
    let step = PI / 180.0;
    let best = (0..360).map(|i| i as f64 * step).min_by(|a, b| quad_form(h, hh, *a).total_cmp(&quad_form(h, hh, *b))).unwrap();
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if quad_form(h, hh, x1) < quad_form(h, hh, x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    quad_form(h, hh, 0.5 * (lo + hi)).min(quad_form(h, hh, best))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn upsilon_matches_brute_force(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -2.0..2.0f64) {
        let u = upsilon_point([a, b], [c, d]);
        let brute = upsilon_brute([a, b], [c, d]);
        prop_assert!((u - brute).abs() < 1e-6, "{} vs {}", u, brute);
        prop_assert!(u >= 0.0);
    }

    #[test]
    fn upsilon_vanishes_for_collinear_pairs(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -4.0..4.0f64) {
        prop_assert_eq!(upsilon_point([a, b], [c * a, c * b]), 0.0);
    }
}

fn curved(n: usize) -> (pil::harmonic::Slab, SurfaceGeometry) {
    let s = slab(n, 9, 0.0);
    let g = HeightField::new(&s.reference.grid, s.reference.grid.sample(|u, v| 0.1 * u.sin() + 0.05 * (u + v).cos())).unwrap();
    let geom = build_geometry(&s.reference, &g).unwrap();
    (s, geom)
}

#[test]
fn upsilon_field_on_curved_surface_matches_brute_force() {
    let (_, geom) = curved(16);
    let g = &geom.grid;
    let h: [Vec<f64>; 3] = [g.sample(|u, _| 1.0 + 0.3 * u.cos()), g.sample(|_, v| 0.2 * v.sin()), g.sample(|u, v| 0.1 * (u - v).sin())];
    let hh: [Vec<f64>; 3] = [g.sample(|_, v| 0.4 * v.cos()), g.sample(|u, _| 0.9 + 0.2 * u.sin()), g.sample(|_, _| 0.05)];
    let ups = upsilon_field(&geom, &h, &hh);
    for p in 0..g.np() {
        // Independent frame: e₁ ∥ ∂_u Φ, e₂ = n × e₁.
        let n = geom.normal_at(p);
        let t = [geom.tu[0][p], geom.tu[1][p], geom.tu[2][p]];
        let l = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        let e1 = [t[0] / l, t[1] / l, t[2] / l];
        let e2 = [n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]];
        let dot = |x: &[Vec<f64>; 3], e: [f64; 3]| x[0][p] * e[0] + x[1][p] * e[1] + x[2][p] * e[2];
        let brute = upsilon_brute([dot(&h, e1), dot(&h, e2)], [dot(&hh, e1), dot(&hh, e2)]);
        assert!((ups[p] - brute).abs() < 1e-6);
    }
}

#[test]
fn orthogonal_unit_fields_give_unit_upsilon() {
    // Ĵ = (1, 0) on the bottom wall gives ĥ = (0, 1, 0).
    let pb = problem(8, 7, 0.5, [1.0, 0.0]);
    let st = equilibrium_state(&pb, 1.0);
    let f = Frame::new(&pb, &st.gamma, 0.0, false).unwrap();
    assert!((f.hhat_trace[1][0] - 1.0).abs() < 1e-12);
    let r = stability_monitors(&pb, &st, &f).unwrap();
    assert!((r.upsilon - 1.0).abs() < 1e-12, "{}", r.upsilon);
    assert!((r.wall_gap - 1.0).abs() < 1e-12);
    assert!((r.chart_margin - 0.4).abs() < 1e-15);
    assert!((r.syrovatskij_margin - 1.0).abs() < 1e-12);
}

#[test]
fn zero_fields_give_zero_monitors() {
    let pb = problem(8, 7, 0.0, [0.0, 0.0]);
    let st = equilibrium_state(&pb, 0.0);
    let f = Frame::new(&pb, &st.gamma, 0.0, false).unwrap();
    let r = stability_monitors(&pb, &st, &f).unwrap();
    assert_eq!(r.upsilon, 0.0);
    assert!(r.rt_min.abs() < 1e-14);
    let e = physical_energy(&pb, &st, &f).unwrap();
    assert_eq!(e.total, 0.0);
    assert_eq!(e.input_power, Some(0.0));
}

#[test]
fn flat_surface_energy_is_alpha_squared_torus_area() {
    for alpha in [0.0, 0.3, 1.0] {
        let pb = problem(8, 7, alpha, [0.2, 0.1]);
        let st = equilibrium_state(&pb, 0.5);
        let f = Frame::new(&pb, &st.gamma, 0.0, false).unwrap();
        let e = physical_energy(&pb, &st, &f).unwrap();
        assert!((e.surface - alpha * alpha * AREA).abs() < 1e-12);
        // ½|h|² over the unit-height plasma slab, ½|ĥ|² over the vacuum.
        assert!((e.magnetic_plus - 0.125 * AREA).abs() < 1e-11);
        assert!((e.magnetic_vacuum - 0.5 * 0.05 * AREA).abs() < 1e-11);
        assert!(e.kinetic == 0.0);
        let sum = e.kinetic + e.magnetic_plus + e.magnetic_vacuum + e.surface;
        assert_eq!(e.total, sum);
        assert!(e.input_power.unwrap().abs() < 1e-12);
    }
}

#[test]
fn energy_parts_are_nonnegative_and_surface_scales_with_alpha_squared() {
    let s1 = problem(12, 9, 1.0, [0.0, 0.0]);
    let s2 = problem(12, 9, 0.5, [0.0, 0.0]);
    let st = capillary_state(&s1, 0.08);
    let f1 = Frame::new(&s1, &st.gamma, 0.0, false).unwrap();
    let f2 = Frame::new(&s2, &st.gamma, 0.0, false).unwrap();
    let e1 = physical_energy(&s1, &st, &f1).unwrap();
    let e2 = physical_energy(&s2, &st, &f2).unwrap();
    assert!(e1.surface > AREA);
    assert!((e2.surface - 0.25 * e1.surface).abs() < 1e-13 * e1.surface);
    for e in [e1, e2] {
        assert!(e.kinetic >= 0.0 && e.magnetic_plus >= 0.0 && e.magnetic_vacuum >= 0.0);
    }
}

#[test]
fn budget_of_exact_quadratic_energy() {
    let t: Vec<f64> = (0..9).map(|i| 0.1 * i as f64).collect();
    let e: Vec<f64> = t.iter().map(|x| 3.0 + x * x).collect();
    let p: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
    let b = energy_budget(&t, &e, &p).unwrap();
    assert!(b.pointwise.iter().all(|x| x.abs() < 1e-12));
    assert!(b.integrated.abs() < 1e-12);
    assert!(energy_budget(&t[..2], &e[..2], &p[..2]).is_err());
}

#[test]
fn equilibrium_budget_is_round_off() {
    let pb = problem(8, 9, 0.5, [0.3, -0.2]);
    let cfg = StepperConfig { dt: 0.05, t_end: 0.5, filter: Filter::Off, dealias: true };
    let mut stepper = Stepper::new(&pb, cfg).unwrap();
    let mut t = vec![];
    let mut e = vec![];
    let mut p = vec![];
    run(&mut stepper, equilibrium_state(&pb, 0.8), |s, _| {
        let f = Frame::new(&pb, &s.gamma, s.t, false).unwrap();
        let r = physical_energy(&pb, s, &f).unwrap();
        t.push(s.t);
        e.push(r.total);
        p.push(r.input_power.unwrap());
        Ok(())
    })
    .unwrap();
    let b = energy_budget(&t, &e, &p).unwrap();
    assert!(b.pointwise.iter().all(|x| x.abs() < 1e-9));
    assert!(b.integrated.abs() < 1e-10);
}

#[test]
fn ramped_current_budget_on_flat_interface() {
    // ĥ = a(t)(0, 1, 0) grows uniformly; the vacuum energy gain equals ∫Ê·Ĵ.
    let s = slab(8, 9, 0.0);
    let base = SurfaceCurrent::constant(&s.reference.grid, [1.0, 0.0]);
    let pb = Problem::new(s, 0.5, CurrentLaw { base, law: TimeLaw::Affine { offset: 0.5, rate: 0.4 } }).unwrap();
    let st = equilibrium_state(&pb, 0.6);
    let mut t = vec![];
    let mut e = vec![];
    let mut p = vec![];
    for k in 0..5 {
        let s = SimState { t: 0.1 * k as f64, step: k, ..st.clone() };
        let f = Frame::new(&pb, &s.gamma, s.t, false).unwrap();
        let r = physical_energy(&pb, &s, &f).unwrap();
        assert!(r.e_residual < 1e-10);
        let a = 0.5 + 0.4 * s.t;
        assert!((r.input_power.unwrap() - a * 0.4 * AREA).abs() < 1e-10);
        t.push(s.t);
        e.push(r.total);
        p.push(r.input_power.unwrap());
    }
    let b = energy_budget(&t, &e, &p).unwrap();
    assert!(b.integrated.abs() < 1e-10 * b.input_work);
}

#[test]
fn electric_field_meets_its_boundary_conditions() {
    let s = slab(16, 13, 0.0);
    let grid = s.reference.grid.clone();
    let j = SurfaceCurrent::new(&grid, grid.sample(|_, v| 0.5 + 0.2 * v.cos()), grid.sample(|u, _| 0.3 * u.sin())).unwrap();
    let pb = Problem::new(s, 1.0, CurrentLaw { base: j, law: TimeLaw::Sine { amplitude: 1.0, omega: 1.3 } }).unwrap();
    let mut st = capillary_state(&pb, 0.05);
    st.t = 0.4;
    let f = Frame::new(&pb, &st.gamma, st.t, false).unwrap();
    let r = physical_energy(&pb, &st, &f).unwrap();
    assert!(r.input_power.is_some());
    assert!(r.e_residual < 1e-8, "{}", r.e_residual);
}

#[test]
fn filtered_windows_are_rejected() {
    let pb = problem(8, 7, 1.0, [0.0, 0.0]);
    let st = capillary_state(&pb, 0.02);
    let w = vec![st; 5];
    let err = kappa_evolution_residuals(&pb, &w, 0.1, Filter::Exp { strength: 36.0, order: 8 }).unwrap_err();
    assert!(matches!(err, PilError::FilterContamination));
    assert!(kappa_evolution_residuals(&pb, &w[..4], 0.1, Filter::Off).is_err());
}

fn capillary_window(n: usize, nz: usize, dt: f64, t_c: f64, eps: f64) -> (Problem, Vec<SimState>) {
    let pb = problem(n, nz, 1.0, [0.0, 0.0]);
    let cfg = StepperConfig { dt, t_end: t_c + 2.0 * dt, filter: Filter::Off, dealias: true };
    let mut stepper = Stepper::new(&pb, cfg).unwrap();
    let k0 = ((t_c - 2.0 * dt) / dt).round() as u64;
    let mut w = vec![];
    run(&mut stepper, capillary_state(&pb, eps), |s, _| {
        if s.step >= k0 {
            w.push(s.clone());
        }
        Ok(())
    })
    .unwrap();
    (pb, w)
}

#[test]
fn equilibrium_identity_residuals_vanish() {
    let pb = problem(8, 9, 0.5, [0.3, -0.2]);
    let st = equilibrium_state(&pb, 0.8);
    let w: Vec<SimState> = (0..5).map(|k| SimState { t: 0.1 * k as f64, step: k, ..st.clone() }).collect();
    let r = kappa_evolution_residuals(&pb, &w, 0.1, Filter::Off).unwrap();
    assert!(r.kappa_first_order < 1e-12 && r.kappa_second_order < 1e-10 && r.ds_transport < 1e-12);
    assert!(r.simons < 1e-12 && r.lap_n < 1e-12);
    assert!(!r.filtered);
}

#[test]
fn first_order_kappa_residual_is_small_and_second_order_is_quadratic() {
    let (pb, w) = capillary_window(16, 13, 0.05, 1.0, 0.05);
    let big = kappa_evolution_residuals(&pb, &w, 0.05, Filter::Off).unwrap();
    let (pb, w) = capillary_window(16, 13, 0.05, 1.0, 0.025);
    let small = kappa_evolution_residuals(&pb, &w, 0.05, Filter::Off).unwrap();
    assert!(big.kappa_first_order < 1e-6, "{}", big.kappa_first_order);
    assert!(big.ds_transport < 1e-6);
    // The remainder beyond the explicit term set is quadratic in the amplitude.
    let ratio = big.kappa_second_order / small.kappa_second_order;
    assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
    let lead = big.second_order_terms.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(lead.0, "alpha2_lap_n_kappa");
}

fn flat_dn(n: usize) -> (SurfaceGeometry, std::sync::Arc<DNOperator>, FractionalPowers) {
    let s = slab(n, 13, 0.0);
    let geom = build_geometry(&s.reference, &HeightField::zeros(&s.reference.grid)).unwrap();
    let plus = s.harmonic_coordinates(&geom, Side::Plus).unwrap();
    let dn = s.dn_operator(&plus, &geom).unwrap();
    let fp = FractionalPowers::new(&dn, &geom, s.tol).unwrap();
    (geom, dn, fp)
}

#[test]
fn sobolev_flat_mode_oracle() {
    let (geom, dn, fp) = flat_dn(8);
    let g = &geom.grid;
    let np = g.np();
    let alpha: f64 = 0.7;
    // Mode (2, 1): 𝒩 has symbol μ = |k| tanh|k| (d₊ = 1), 𝒟² has μ|k|².
    for (m, f) in [((1.0f64, 0.0f64), g.sample(|u, _| u.cos())), ((2.0, 1.0), g.sample(|u, v| (2.0 * u + v).cos()))] {
        let k = (m.0 * m.0 + m.1 * m.1).sqrt();
        let mu = k * k.tanh();
        let input = SobolevInputs { kappa: f, dt_kappa: vec![0.0; np], dh_kappa: vec![0.0; np], dhh_kappa: vec![0.0; np], rt: vec![0.0; np] };
        for kk in [3u32, 4] {
            let (e_l, e_bar, e1) = surface_energies(&geom, &dn, &fp, &input, kk, alpha).unwrap();
            let want = alpha * alpha * (mu * k * k).powi(kk as i32 - 1) * mu * 2.0 * PI * PI;
            assert!(((e_bar - want) / want).abs() < 1e-8, "k={kk}: {e_bar} vs {want}");
            assert!(((e1 - want) / want).abs() < 1e-8);
            assert_eq!(e_l.len(), kk as usize - 1);
            for (l, e) in e_l.iter().enumerate() {
                let w = (mu * k * k).powi(l as i32 + 1) * mu * 2.0 * PI * PI;
                assert!(((e - w) / w).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn sobolev_rt_weight_enters_only_the_alpha_energy() {
    let (geom, dn, fp) = flat_dn(8);
    let g = &geom.grid;
    let np = g.np();
    let input = SobolevInputs { kappa: g.sample(|u, _| u.cos()), dt_kappa: vec![0.0; np], dh_kappa: vec![0.0; np], dhh_kappa: vec![0.0; np], rt: vec![2.0; np] };
    let (_, e_bar, e1) = surface_energies(&geom, &dn, &fp, &input, 3, 0.0).unwrap();
    let mu = 1f64.tanh();
    // 𝒟𝒩 cos u = μ^{3/2} cos u.
    assert!((e_bar - 2.0 * mu.powi(3) * 2.0 * PI * PI).abs() < 1e-8);
    assert_eq!(e1, 0.0);
    assert!(surface_energies(&geom, &dn, &fp, &input, 2, 0.0).is_err());
}

#[test]
fn bulk_sobolev_norm_of_a_plane_wave() {
    let pb = problem(8, 9, 0.5, [0.0, 0.0]);
    let f = Frame::new(&pb, &HeightField::zeros(&pb.slab.reference.grid), 0.0, false).unwrap();
    let s = f.plus.sample(|x| x[0].sin());
    // ∫ sin², ∫ cos², ∫ sin² over [0, 2π]² × [0, 1].
    let v = bulk_sobolev_sq(&f.plus, &s, 2);
    assert!((v - 3.0 * 2.0 * PI * PI).abs() < 1e-10);
}

#[test]
fn sobolev_energies_of_flat_static_state_vanish() {
    let pb = problem(8, 9, 0.5, [0.3, -0.2]);
    let st = equilibrium_state(&pb, 0.8);
    let f = Frame::new(&pb, &st.gamma, 0.0, false).unwrap();
    let e = sobolev_energies(&pb, &st, &f, 3).unwrap();
    assert!(e.e_l.iter().all(|x| x.abs() < 1e-20));
    assert!(e.e_bar_alpha.abs() < 1e-20);
    assert!(e.script[1].abs() < 1e-20 && e.script[2].abs() < 1e-20);
    assert!((e.script[3] - (0.8 * AREA).powi(2)).abs() < 1e-9);
}

#[test]
fn sobolev_energies_are_continuous_along_a_run() {
    let pb = problem(12, 9, 1.0, [0.0, 0.0]);
    let cfg = StepperConfig { dt: 0.05, t_end: 0.5, filter: Filter::Off, dealias: true };
    let mut stepper = Stepper::new(&pb, cfg).unwrap();
    let mut prev: Option<f64> = None;
    run(&mut stepper, capillary_state(&pb, 0.05), |s, _| {
        let f = Frame::new(&pb, &s.gamma, s.t, false).unwrap();
        let e = sobolev_energies(&pb, s, &f, 3).unwrap();
        assert!(e.e_bar_alpha.is_finite() && e.e_bar_alpha > 0.0);
        if let Some(p) = prev {
            assert!(e.e_bar_alpha < 10.0 * p && e.e_bar_alpha > 0.1 * p);
        }
        prev = Some(e.e_bar_alpha);
        Ok(())
    })
    .unwrap();
    assert!(max_abs(&[prev.unwrap()]) > 0.0);
}
