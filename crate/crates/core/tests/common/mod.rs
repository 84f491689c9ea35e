#![allow(dead_code)]

use pil::evolution::*;
use pil::fields::{Fluxes, SurfaceCurrent};
use pil::harmonic::{BulkGrid, SolverOptions, Slab};
use pil::spectral::Fourier2;
use pil::surface::{HeightField, ReferenceSurface};
use std::f64::consts::PI;

pub const AREA: f64 = 4.0 * PI * PI;

pub fn slab(n: usize, nz: usize, z0: f64) -> Slab {
    let r = ReferenceSurface::flat(Fourier2::new(n, n), z0, 0.4, 0.1).unwrap();
    Slab::new(r, nz, SolverOptions::default()).unwrap()
}

pub fn problem(n: usize, nz: usize, alpha: f64, j: [f64; 2]) -> Problem {
    let s = slab(n, nz, 0.0);
    let cur = CurrentLaw::constant(SurfaceCurrent::constant(&s.reference.grid, j));
    Problem::new(s, alpha, cur).unwrap()
}

pub fn zeros3(len: usize) -> [Vec<f64>; 3] {
    [vec![0.0; len], vec![0.0; len], vec![0.0; len]]
}

pub fn r3(v: &[Vec<f64>; 3]) -> [&[f64]; 3] {
    [&v[0], &v[1], &v[2]]
}

pub fn vec_sample(g: &BulkGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> [Vec<f64>; 3] {
    let vals: Vec<[f64; 3]> = (0..g.len()).map(|i| f(g.position(i))).collect();
    std::array::from_fn(|a| vals.iter().map(|v| v[a]).collect())
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_diff3(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> f64 {
    (0..3).map(|k| max_diff(&a[k], &b[k])).fold(0.0, f64::max)
}

/// Flat interface, `v = 0`, constant horizontal `h`.
pub fn equilibrium_state(pb: &Problem, h1: f64) -> SimState {
    let s = &pb.slab;
    let len = s.nz() * s.reference.grid.np();
    let mut h = zeros3(len);
    h[0] = vec![h1; len];
    SimState {
        t0: 0.0,
        step: 0,
        t: 0.0,
        gamma: HeightField::zeros(&s.reference.grid),
        v: zeros3(len),
        h,
        fluxes: Fluxes { v: [0.0; 2], h: [h1 * AREA, 0.0] },
    }
}

/// `γ = ε cos u` at rest.
pub fn capillary_state(pb: &Problem, eps: f64) -> SimState {
    let grid = &pb.slab.reference.grid;
    let len = pb.slab.nz() * grid.np();
    SimState {
        t0: 0.0,
        step: 0,
        t: 0.0,
        gamma: HeightField::new(grid, grid.sample(|u, _| eps * u.cos())).unwrap(),
        v: zeros3(len),
        h: zeros3(len),
        fluxes: Fluxes::default(),
    }
}

/// Real amplitude of the `cos u` mode of `γ`.
pub fn mode_amplitude(grid: &Fourier2, gamma: &[f64]) -> f64 {
    let n = grid.np() as f64;
    grid.forward(gamma)[grid.nv].re * 2.0 / n
}

/// Times where a sampled signal crosses zero (linear interpolation).
pub fn zero_crossings(t: &[f64], a: &[f64]) -> Vec<f64> {
    (1..a.len())
        .filter(|&i| a[i - 1] != 0.0 && a[i - 1].signum() != a[i].signum())
        .map(|i| t[i - 1] + (t[i] - t[i - 1]) * a[i - 1] / (a[i - 1] - a[i]))
        .collect()
}

/// Oscillation frequency of the `cos u` mode from its zero crossings.
pub fn capillary_frequency(pb: &Problem, eps: f64, dt: f64, t_end: f64) -> f64 {
    let grid = pb.slab.reference.grid.clone();
    let cfg = StepperConfig { dt, t_end, filter: Filter::Off, dealias: true };
    let mut stepper = Stepper::new(pb, cfg).unwrap();
    let s0 = capillary_state(pb, eps);
    let mut ts = vec![0.0];
    let mut amp = vec![mode_amplitude(&grid, &s0.gamma.values)];
    run(&mut stepper, s0, |s, _| {
        ts.push(s.t);
        amp.push(mode_amplitude(&grid, &s.gamma.values));
        Ok(())
    })
    .unwrap();
    let z = zero_crossings(&ts, &amp);
    assert!(z.len() >= 2, "need two zero crossings, got {}", z.len());
    let half_periods = (z.len() - 1) as f64;
    PI * half_periods / (z[z.len() - 1] - z[0])
}

/// Frequency of the linearized capillary mode from the 2×2 system
/// `d/dt (γ̂, φ̂) = [[0, k tanh(k d₊)], [-α²k², 0]] (γ̂, φ̂)`, where `φ̂` is the
/// interface velocity potential and the vacuum carries no inertia.
pub fn capillary_oracle(alpha: f64, k: f64, d_plus: f64) -> f64 {
    let m = nalgebra::Matrix2::new(0.0, k * (k * d_plus).tanh(), -alpha * alpha * k * k, 0.0);
    let ev = m.complex_eigenvalues();
    ev[0].im.abs()
}
