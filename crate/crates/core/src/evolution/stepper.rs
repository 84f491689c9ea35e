use super::{bulk_rhs, flux_rhs, grid_velocity, kinematic_rhs, Filter, Frame, Problem, SimState, StepperConfig};
use crate::error::{PilError, Result};
use crate::fields::{interface_dot_normal, leray_project, wall_flux, Fluxes};
use crate::harmonic::Side;
use crate::spectral::{max_abs, Fourier2};
use crate::surface::HeightField;

/// Corrections and monitors recorded for one accepted step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    /// `max|div v|` before the projection.
    pub div_v: f64,
    pub div_h: f64,
    /// `max|h·n|` on `Γ_t` before the projection.
    pub h_normal: f64,
    /// Surface mean of `v·n` removed by the projection.
    pub v_normal_mean: f64,
    /// Largest change of `v` and `h` made by the projection.
    pub projection_v: f64,
    pub projection_h: f64,
    /// `|𝔳 - ∫ v|`, `|𝔥 - ∫ h|` on the wall after the step.
    pub flux_defect: f64,
    /// `dt·max|v|/Δx`.
    pub cfl: f64,
    /// `dt·α·k_max^{3/2}`, the capillary stability number.
    pub capillary_number: f64,
}

#[derive(Clone)]
struct Stage {
    gamma: Vec<f64>,
    v: [Vec<f64>; 3],
    h: [Vec<f64>; 3],
    flux: Fluxes,
}

impl Stage {
    fn from_state(s: &SimState) -> Self {
        Stage { gamma: s.gamma.values.clone(), v: s.v.clone(), h: s.h.clone(), flux: s.fluxes }
    }

    /// `self + c·k`.
    fn axpy(&self, c: f64, k: &Stage) -> Stage {
        let ax = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
        let ax3 = |a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]| -> [Vec<f64>; 3] { std::array::from_fn(|i| ax(&a[i], &b[i])) };
        let f2 = |a: [f64; 2], b: [f64; 2]| [a[0] + c * b[0], a[1] + c * b[1]];
        Stage {
            gamma: ax(&self.gamma, &k.gamma),
            v: ax3(&self.v, &k.v),
            h: ax3(&self.h, &k.h),
            flux: Fluxes { v: f2(self.flux.v, k.flux.v), h: f2(self.flux.h, k.flux.h) },
        }
    }
}

fn planewise(grid: &Fourier2, f: &[f64], op: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let np = grid.np();
    f.chunks(np).flat_map(op).collect()
}

fn refs(x: &[Vec<f64>; 3]) -> [&[f64]; 3] {
    [&x[0], &x[1], &x[2]]
}

/// RK4 integrator with a one-entry cache of the interface geometry.
pub struct Stepper<'a> {
    pub problem: &'a Problem,
    pub cfg: StepperConfig,
    cache: Option<Frame>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a Problem, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Stepper { problem, cfg, cache: None })
    }

    /// Geometry, harmonic coordinates and vacuum field for `γ` at time `t`.
    pub fn frame(&mut self, gamma: &[f64], t: f64) -> Result<&Frame> {
        let hit = self.cache.as_ref().map(|f| f.geom_matches(gamma));
        match hit {
            Some(true) => {
                let f = self.cache.as_ref().unwrap();
                if f.t != t {
                    let g = f.at_time(self.problem, t)?;
                    self.cache = Some(g);
                }
            }
            _ => {
                let hf = HeightField { values: gamma.to_vec() };
                self.cache = Some(Frame::new(self.problem, &hf, t, false)?);
            }
        }
        Ok(self.cache.as_ref().unwrap())
    }

    fn rate(&mut self, s: &Stage, t: f64) -> Result<Stage> {
        let dealias = self.cfg.dealias;
        let problem = self.problem;
        let slab = &problem.slab;
        let frame = self.frame(&s.gamma, t)?;
        let grid = &slab.reference.grid;
        let mut gdot = kinematic_rhs(slab, frame, refs(&s.v))?;
        if dealias {
            gdot = grid.dealias(&gdot);
        }
        let w = grid_velocity(slab, Side::Plus, &gdot)?;
        let tend = bulk_rhs(problem, frame, refs(&s.v), refs(&s.h), refs(&w))?;
        let flux = flux_rhs(&frame.plus, &tend);
        let clean = |x: [Vec<f64>; 3]| -> [Vec<f64>; 3] {
            if dealias {
                x.map(|c| planewise(grid, &c, |p| grid.dealias(p)))
            } else {
                x
            }
        };
        Ok(Stage { gamma: gdot, v: clean(tend.dv), h: clean(tend.dh), flux })
    }

    /// One RK4 step followed by the optional filter and the re-projection.
    pub fn step(&mut self, state: &SimState) -> Result<(SimState, StepRecord)> {
        let t = state.t;
        self.step_inner(state).map_err(|e| match e {
            PilError::StepRejected { .. } => e,
            other => PilError::StepRejected { t, reason: Box::new(other) },
        })
    }

    fn step_inner(&mut self, state: &SimState) -> Result<(SimState, StepRecord)> {
        let dt = self.cfg.dt;
        let t = state.t;
        let s0 = Stage::from_state(state);
        let k1 = self.rate(&s0, t)?;
        let k2 = self.rate(&s0.axpy(0.5 * dt, &k1), t + 0.5 * dt)?;
        let k3 = self.rate(&s0.axpy(0.5 * dt, &k2), t + 0.5 * dt)?;
        let k4 = self.rate(&s0.axpy(dt, &k3), t + dt)?;
        let mut s = s0.axpy(dt / 6.0, &k1).axpy(dt / 3.0, &k2).axpy(dt / 3.0, &k3).axpy(dt / 6.0, &k4);
        let grid = self.problem.slab.reference.grid.clone();
        if let Filter::Exp { strength, order } = self.cfg.filter {
            s.gamma = grid.exp_filter(&s.gamma, strength, order);
            let f = |x: &[Vec<f64>; 3]| -> [Vec<f64>; 3] {
                std::array::from_fn(|a| planewise(&grid, &x[a], |p| grid.exp_filter(p, strength, order)))
            };
            s.v = f(&s.v);
            s.h = f(&s.h);
        }
        let step = state.step + 1;
        let t_new = state.t0 + step as f64 * dt;
        let alpha = self.problem.alpha;
        let problem = self.problem;
        let frame = self.frame(&s.gamma, t_new)?;
        let plus = &frame.plus;
        let div_v = max_abs(&plus.div(refs(&s.v)));
        let div_h = max_abs(&plus.div(refs(&s.h)));
        let h_normal = max_abs(&interface_dot_normal(plus, refs(&s.h)));
        let vn = interface_dot_normal(plus, refs(&s.v));
        let (v_new, v_normal_mean) = leray_project(&problem.slab, plus, &frame.geom, refs(&s.v), &vn)?;
        let np = plus.np();
        let (h_new, _) = leray_project(&problem.slab, plus, &frame.geom, refs(&s.h), &vec![0.0; np])?;
        let change = |a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]| {
            (0..3).flat_map(|c| a[c].iter().zip(&b[c]).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
        };
        let projection_v = change(&v_new, &s.v);
        let projection_h = change(&h_new, &s.h);
        let fv = wall_flux(plus, refs(&v_new));
        let fh = wall_flux(plus, refs(&h_new));
        let flux_defect = [fv[0] - s.flux.v[0], fv[1] - s.flux.v[1], fh[0] - s.flux.h[0], fh[1] - s.flux.h[1]]
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        let vmax = (0..v_new[0].len())
            .map(|i| (v_new[0][i].powi(2) + v_new[1][i].powi(2) + v_new[2][i].powi(2)).sqrt())
            .fold(0.0, f64::max);
        let dx = grid.du().min(grid.dv());
        let (ku, kv) = grid.dealias_kmax();
        let kmax = (ku * ku + kv * kv).sqrt();
        let record = StepRecord {
            t: t_new,
            div_v,
            div_h,
            h_normal,
            v_normal_mean,
            projection_v,
            projection_h,
            flux_defect,
            cfl: dt * vmax / dx,
            capillary_number: dt * alpha * kmax.powf(1.5),
        };
        let out = SimState {
            t0: state.t0,
            step,
            t: t_new,
            gamma: HeightField { values: s.gamma },
            v: v_new,
            h: h_new,
            fluxes: s.flux,
        };
        if !out.is_finite() {
            return Err(PilError::NonFiniteInput { what: "state after step".into() });
        }
        Ok((out, record))
    }
}

/// One step with a fresh stepper.
pub fn step(problem: &Problem, cfg: StepperConfig, state: &SimState) -> Result<(SimState, StepRecord)> {
    Stepper::new(problem, cfg)?.step(state)
}

/// Step until `t_end`, calling `observe` after every accepted step.
pub fn run<F>(stepper: &mut Stepper<'_>, state: SimState, mut observe: F) -> Result<SimState>
where
    F: FnMut(&SimState, &StepRecord) -> Result<()>,
{
    let dt = stepper.cfg.dt;
    let total = ((stepper.cfg.t_end - state.t0) / dt).round().max(0.0) as u64;
    let mut s = state;
    while s.step < total {
        let (next, rec) = stepper.step(&s)?;
        observe(&next, &rec)?;
        s = next;
    }
    Ok(s)
}
