//! Scenario files: TOML, dialect "pil-config v1", unknown keys rejected.

use crate::error::{PilError, Result};
use crate::evolution::{CurrentLaw, Filter, Problem, StepperConfig, TimeLaw};
use crate::fields::SurfaceCurrent;
use crate::harmonic::{SolverOptions, Slab};
use crate::spectral::Fourier2;
use crate::surface::ReferenceSurface;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Dialect tag written into every output header.
pub const CONFIG_VERSION: &str = "pil-config v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_version")]
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Seed of the randomized initial modes.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_version() -> String {
    CONFIG_VERSION.to_string()
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

/// One real Fourier mode `cos·cos(k·x) + sin·sin(k·x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: [i32; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub n_u: usize,
    pub n_v: usize,
    pub n_z: usize,
    /// Mean height of the reference surface.
    pub z0: f64,
    /// Chart radius `δ0`.
    pub delta0: f64,
    /// Minimal wall gap `c0`.
    pub c0: f64,
    /// Mollification width of `ν` in grid cells (curved references only).
    pub sigma_nu: f64,
    /// Stiffness `a` of the modified curvature map.
    pub a: f64,
    /// Height modes of a curved reference surface around `z0`.
    pub reference: Vec<Mode>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            n_u: 16,
            n_v: 16,
            n_z: 13,
            z0: 0.0,
            delta0: 0.4,
            c0: 0.1,
            sigma_nu: 1.5,
            a: 10.0,
            reference: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    /// Surface tension coefficient in `[0, 1]`.
    pub alpha: f64,
    pub current: CurrentConfig,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig { alpha: 1.0, current: CurrentConfig::default() }
    }
}

/// `Ĵ(t, x) = a(t)·(j + Σ j_m cos(k_m·x + phase_m))` on the bottom wall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CurrentConfig {
    pub j: [f64; 2],
    pub modes: Vec<CurrentMode>,
    pub law: LawConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentMode {
    pub k: [i32; 2],
    pub j: [f64; 2],
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LawConfig {
    Affine { offset: f64, rate: f64 },
    Sine { amplitude: f64, omega: f64 },
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig::Affine { offset: 1.0, rate: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    /// Height modes of `γ`.
    pub gamma: Vec<Mode>,
    pub random_gamma: Option<RandomModes>,
    /// `𝔳₀/|T²|`: uniform horizontal velocity.
    pub v_mean: [f64; 2],
    /// `𝔥₀/|T²|`: uniform horizontal field.
    pub h_mean: [f64; 2],
    /// Potential flows `∇φ`, `φ ∝ cos(k·x) cosh(|k|(1 - z))`, with normal
    /// velocity amplitude `amplitude` on the flat reference.
    pub potential: Vec<PotentialMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomModes {
    /// Each mode's coefficients are uniform in `[-amplitude, amplitude]`.
    pub amplitude: f64,
    pub kmax: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialMode {
    pub k: [i32; 2],
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub filter: FilterConfig,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dt: 0.05, t_end: 1.0, dealias: true, filter: FilterConfig::Off }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FilterConfig {
    #[default]
    Off,
    Exp { strength: f64, order: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Output every `cadence` steps.
    pub cadence: u64,
    pub energy: bool,
    /// Sobolev energies (assembles the DN operator per row).
    pub sobolev: bool,
    pub sobolev_k: u32,
    /// Curvature-identity residuals over the last five steps.
    pub identities: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { cadence: 1, energy: true, sobolev: false, sobolev_k: 3, identities: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Non-collinearity floor `𝔰₀`.
    pub s0: f64,
    /// Rayleigh-Taylor floor `λ₀`.
    pub lambda0: f64,
    /// Growth factor of the high-wavenumber share of `γ` that raises a flag.
    pub highk_growth: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { s0: 0.1, lambda0: 0.0, highk_growth: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    /// Write a checkpoint every this many steps (0: only at the end).
    pub checkpoint_every: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into(), checkpoint_every: 0 }
    }
}

pub const PRESETS: [&str; 5] = ["equilibrium", "capillary-mode", "rt-stable", "noncollinear", "collinear-control"];

/// TOML text of a named preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "equilibrium" => include_str!("presets/equilibrium.toml"),
        "capillary-mode" => include_str!("presets/capillary-mode.toml"),
        "rt-stable" => include_str!("presets/rt-stable.toml"),
        "noncollinear" => include_str!("presets/noncollinear.toml"),
        "collinear-control" => include_str!("presets/collinear-control.toml"),
        _ => return None,
    })
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_error(e: impl std::fmt::Display) -> PilError {
    PilError::ParseError(e.to_string().trim_end().to_string())
}

/// Parse and validate a scenario. A `preset` key loads the preset first and
/// overlays the remaining keys.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let direct: ScenarioConfig = toml::from_str(text).map_err(parse_error)?;
    let cfg = match &direct.preset {
        None => direct,
        Some(name) => {
            let base_text = preset_text(name)
                .ok_or_else(|| PilError::validation("preset", format!("unknown preset `{name}`, known: {PRESETS:?}")))?;
            let mut base: toml::Table = toml::from_str(base_text).map_err(parse_error)?;
            let user: toml::Table = toml::from_str(text).map_err(parse_error)?;
            merge(&mut base, user);
            toml::Value::Table(base).try_into().map_err(parse_error)?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PilError::ParseError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Built-in preset with defaults applied.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    parse_config(&format!("preset = \"{name}\"\n"))
}

fn check_modes(path: &str, modes: &[[i32; 2]], n: [usize; 2]) -> Result<()> {
    for (i, k) in modes.iter().enumerate() {
        if 2 * k[0].unsigned_abs() as usize >= n[0] || 2 * k[1].unsigned_abs() as usize >= n[1] {
            return Err(PilError::validation(&format!("{path}[{i}].k"), format!("mode {k:?} is not resolved on the grid")));
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(PilError::validation("version", format!("expected \"{CONFIG_VERSION}\"")));
        }
        let g = &self.geometry;
        for (path, n) in [("geometry.n_u", g.n_u), ("geometry.n_v", g.n_v)] {
            if n < 4 || n % 2 != 0 {
                return Err(PilError::validation(path, "must be even and >= 4"));
            }
        }
        if g.n_z < 5 {
            return Err(PilError::validation("geometry.n_z", "must be >= 5"));
        }
        for (path, x) in [("geometry.delta0", g.delta0), ("geometry.c0", g.c0), ("geometry.a", g.a)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(PilError::validation(path, "must be positive"));
            }
        }
        if !(g.z0.abs() < 1.0) {
            return Err(PilError::validation("geometry.z0", "must lie in (-1, 1)"));
        }
        let n = [g.n_u, g.n_v];
        check_modes("geometry.reference", &g.reference.iter().map(|m| m.k).collect::<Vec<_>>(), n)?;
        check_modes("initial.gamma", &self.initial.gamma.iter().map(|m| m.k).collect::<Vec<_>>(), n)?;
        check_modes("initial.potential", &self.initial.potential.iter().map(|m| m.k).collect::<Vec<_>>(), n)?;
        check_modes("physics.current.modes", &self.physics.current.modes.iter().map(|m| m.k).collect::<Vec<_>>(), n)?;
        if self.initial.potential.iter().any(|m| m.k == [0, 0]) {
            return Err(PilError::validation("initial.potential", "k = [0, 0] carries no flow"));
        }
        if let Some(r) = self.initial.random_gamma {
            if r.kmax < 0 || 2 * r.kmax as usize >= g.n_u.min(g.n_v) {
                return Err(PilError::validation("initial.random_gamma.kmax", "must be resolved on the grid"));
            }
        }
        if !(0.0..=1.0).contains(&self.physics.alpha) {
            return Err(PilError::validation("physics.alpha", "α ∈ [0,1]"));
        }
        self.stepper_config().validate()?;
        if self.time.t_end < 0.0 {
            return Err(PilError::validation("time.t_end", "must be >= 0"));
        }
        if self.diagnostics.cadence == 0 {
            return Err(PilError::validation("diagnostics.cadence", "must be >= 1"));
        }
        if self.diagnostics.sobolev_k < 3 {
            return Err(PilError::validation("diagnostics.sobolev_k", "must be >= 3"));
        }
        let grid = Fourier2::new(g.n_u, g.n_v);
        let j = self.current_pattern(&grid)?;
        let div = j.divergence(&grid).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let scale = j.j.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
        if div > 1e-10 * scale {
            return Err(PilError::validation(
                "physics.current",
                format!("surface divergence of the current is {div:.3e}; the compatibility condition needs Div Ĵ = 0"),
            ));
        }
        Ok(())
    }

    pub fn stepper_config(&self) -> StepperConfig {
        let filter = match self.time.filter {
            FilterConfig::Off => Filter::Off,
            FilterConfig::Exp { strength, order } => Filter::Exp { strength, order },
        };
        StepperConfig { dt: self.time.dt, t_end: self.time.t_end, filter, dealias: self.time.dealias }
    }

    /// Canonical TOML of everything that affects results.
    pub fn canonical_text(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        toml::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let d = Sha256::digest(self.canonical_text().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn filter_label(&self) -> String {
        match self.time.filter {
            FilterConfig::Off => "off".into(),
            FilterConfig::Exp { strength, order } => format!("exp(strength={strength},order={order})"),
        }
    }

    /// Number of steps to `t_end`.
    pub fn total_steps(&self) -> u64 {
        (self.time.t_end / self.time.dt).round() as u64
    }

    fn current_pattern(&self, grid: &Fourier2) -> Result<SurfaceCurrent> {
        let c = &self.physics.current;
        let comp = |a: usize| {
            grid.sample(|u, v| {
                c.j[a]
                    + c.modes
                        .iter()
                        .map(|m| m.j[a] * (m.k[0] as f64 * u + m.k[1] as f64 * v + m.phase).cos())
                        .sum::<f64>()
            })
        };
        SurfaceCurrent::new(grid, comp(0), comp(1))
    }

    pub fn slab(&self) -> Result<Slab> {
        let g = &self.geometry;
        let grid = Fourier2::new(g.n_u, g.n_v);
        let reference = if g.reference.is_empty() {
            ReferenceSurface::flat(grid, g.z0, g.delta0, g.c0)?
        } else {
            let h: Vec<f64> = sample_modes(&grid, &g.reference).iter().map(|x| x + g.z0).collect();
            ReferenceSurface::graph(grid, h, g.sigma_nu, g.delta0, g.c0)?
        };
        Slab::new(reference, g.n_z, SolverOptions::default())
    }

    pub fn problem(&self) -> Result<Problem> {
        let slab = self.slab()?;
        let base = self.current_pattern(&slab.reference.grid)?;
        let law = match self.physics.current.law {
            LawConfig::Affine { offset, rate } => TimeLaw::Affine { offset, rate },
            LawConfig::Sine { amplitude, omega } => TimeLaw::Sine { amplitude, omega },
        };
        Problem::new(slab, self.physics.alpha, CurrentLaw { base, law })
    }

    /// Initial height values: listed modes plus the seeded random modes.
    pub fn initial_gamma(&self, grid: &Fourier2) -> Vec<f64> {
        let mut g = sample_modes(grid, &self.initial.gamma);
        if let Some(r) = self.initial.random_gamma {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let mut modes = Vec::new();
            for ku in 0..=r.kmax {
                for kv in -r.kmax..=r.kmax {
                    if (ku == 0 && kv <= 0) || ku * ku + kv * kv > r.kmax * r.kmax {
                        continue;
                    }
                    let cos = rng.gen_range(-r.amplitude..=r.amplitude);
                    let sin = rng.gen_range(-r.amplitude..=r.amplitude);
                    modes.push(Mode { k: [ku, kv], cos, sin });
                }
            }
            let extra = sample_modes(grid, &modes);
            g.iter_mut().zip(extra).for_each(|(a, b)| *a += b);
        }
        g
    }
}

pub fn sample_modes(grid: &Fourier2, modes: &[Mode]) -> Vec<f64> {
    grid.sample(|u, v| {
        modes
            .iter()
            .map(|m| {
                let ph = m.k[0] as f64 * u + m.k[1] as f64 * v;
                m.cos * ph.cos() + m.sin * ph.sin()
            })
            .sum()
    })
}
