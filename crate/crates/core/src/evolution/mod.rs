//! Time integration of the coupled interface / plasma / vacuum system.
//!
//! The primary unknowns are `γ`, and `v`, `h` sampled on the plasma-side
//! computational grid. The grid follows the interface through harmonic
//! coordinates, so bulk tendencies carry the grid-velocity correction
//! (`d/dt|_ξ = ∂t + w·∇`). The vacuum field is recomputed from the surface
//! current at every stage.

mod frame;
mod rhs;
mod stepper;

pub use frame::Frame;
pub use rhs::{bulk_rhs, flux_rhs, grid_velocity, kinematic_rhs, transport_rhs, BulkTendency, TransportTendency};
pub use stepper::{run, step, StepRecord, Stepper};

use crate::error::{PilError, Result};
use crate::fields::{Fluxes, SurfaceCurrent};
use crate::harmonic::Slab;
use crate::surface::HeightField;

/// Scalar time profile multiplying a fixed current pattern.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeLaw {
    /// `a(t) = offset + rate·t`.
    Affine { offset: f64, rate: f64 },
    /// `a(t) = amplitude·sin(ω t)`.
    Sine { amplitude: f64, omega: f64 },
}

impl TimeLaw {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeLaw::Affine { offset, rate } => offset + rate * t,
            TimeLaw::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            TimeLaw::Affine { rate, .. } => rate,
            TimeLaw::Sine { amplitude, omega } => amplitude * omega * (omega * t).cos(),
        }
    }
}

/// `Ĵ(t) = a(t)·Ĵ₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentLaw {
    pub base: SurfaceCurrent,
    pub law: TimeLaw,
}

impl CurrentLaw {
    pub fn constant(base: SurfaceCurrent) -> Self {
        CurrentLaw { base, law: TimeLaw::Affine { offset: 1.0, rate: 0.0 } }
    }

    pub fn at(&self, t: f64) -> SurfaceCurrent {
        self.base.scaled(self.law.value(t))
    }

    pub fn rate(&self, t: f64) -> SurfaceCurrent {
        self.base.scaled(self.law.rate(t))
    }

    /// True when the current vanishes identically in time.
    pub fn is_zero(&self) -> bool {
        self.base.j.iter().all(|c| c.iter().all(|x| *x == 0.0))
    }
}

/// Everything that stays fixed along a run.
#[derive(Debug)]
pub struct Problem {
    pub slab: Slab,
    /// Surface-tension coefficient `α ∈ [0, 1]`.
    pub alpha: f64,
    pub current: CurrentLaw,
}

impl Problem {
    pub fn new(slab: Slab, alpha: f64, current: CurrentLaw) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(PilError::validation("physics.alpha", "must lie in [0, 1]"));
        }
        current.base.check(&slab.reference.grid, 1e-8)?;
        Ok(Problem { slab, alpha, current })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Filter {
    Off,
    /// `exp(-strength (|k|/k_max)^order)` on `γ` and on every plane of `v`, `h`.
    Exp { strength: f64, order: u32 },
}

impl Filter {
    pub fn is_on(&self) -> bool {
        !matches!(self, Filter::Off)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub filter: Filter,
    /// 2/3-rule truncation of stage tendencies.
    pub dealias: bool,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PilError::validation("time.dt", "must be positive"));
        }
        if !self.t_end.is_finite() {
            return Err(PilError::validation("time.t_end", "must be finite"));
        }
        if let Filter::Exp { strength, order } = self.filter {
            if !(strength >= 0.0) || order == 0 {
                return Err(PilError::validation("filter", "strength must be >= 0 and order >= 1"));
            }
        }
        Ok(())
    }
}

/// Interface, plasma fields and wall fluxes at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    /// Start time of the run; `t = t0 + step·dt`.
    pub t0: f64,
    pub step: u64,
    pub t: f64,
    pub gamma: HeightField,
    pub v: [Vec<f64>; 3],
    pub h: [Vec<f64>; 3],
    pub fluxes: Fluxes,
}

impl SimState {
    pub fn v_ref(&self) -> [&[f64]; 3] {
        [&self.v[0], &self.v[1], &self.v[2]]
    }

    pub fn h_ref(&self) -> [&[f64]; 3] {
        [&self.h[0], &self.h[1], &self.h[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.gamma.values.iter().chain(self.v.iter().flatten()).chain(self.h.iter().flatten()).all(|x| x.is_finite())
    }
}
