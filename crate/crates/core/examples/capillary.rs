//! Standing capillary wave: evolve `γ = ε cos u` and compare the measured
//! frequency with the linear slab dispersion relation.

use pil::evolution::{run, CurrentLaw, Filter, Problem, SimState, Stepper, StepperConfig};
use pil::fields::{Fluxes, SurfaceCurrent};
use pil::harmonic::{Slab, SolverOptions};
use pil::spectral::Fourier2;
use pil::surface::{HeightField, ReferenceSurface};

fn main() -> pil::Result<()> {
    let (n, nz, alpha, eps) = (16, 13, 1.0, 0.01);
    let reference = ReferenceSurface::flat(Fourier2::new(n, n), 0.0, 0.4, 0.1)?;
    let slab = Slab::new(reference, nz, SolverOptions::default())?;
    let grid = slab.reference.grid.clone();
    let current = CurrentLaw::constant(SurfaceCurrent::zeros(&grid));
    let problem = Problem::new(slab, alpha, current)?;
    let len = nz * grid.np();
    let zero = || [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let state = SimState {
        t0: 0.0,
        step: 0,
        t: 0.0,
        gamma: HeightField::new(&grid, grid.sample(|u, _| eps * u.cos()))?,
        v: zero(),
        h: zero(),
        fluxes: Fluxes::default(),
    };
    let mut stepper = Stepper::new(&problem, StepperConfig { dt: 0.05, t_end: 8.0, filter: Filter::Off, dealias: true })?;
    let amp = |g: &[f64]| grid.forward(g)[grid.nv].re * 2.0 / grid.np() as f64;
    let mut last = (0.0, amp(&state.gamma.values));
    let mut crossings = Vec::new();
    run(&mut stepper, state, |s, _| {
        let a = amp(&s.gamma.values);
        if a.signum() != last.1.signum() {
            crossings.push(last.0 + (s.t - last.0) * last.1 / (last.1 - a));
        }
        if s.step % 20 == 0 {
            println!("t = {:5.2}  amplitude {a:+.6e}", s.t);
        }
        last = (s.t, a);
        Ok(())
    })?;
    let omega = std::f64::consts::PI * (crossings.len() - 1) as f64 / (crossings[crossings.len() - 1] - crossings[0]);
    let linear = alpha * (1.0_f64.tanh()).sqrt();
    println!("measured ω = {omega:.5}, linear ω = {linear:.5}, relative gap {:.2e}", (omega - linear).abs() / linear);
    Ok(())
}
