//! Runs driven by a scenario: initial data, stepping, diagnostics rows,
//! checkpoints, restore, α sweeps and the static identity suite.

use super::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, SeriesAccumulator};
use super::config::ScenarioConfig;
use super::series::{SeriesWriter, TimeSeriesRow};
use crate::diagnostics::{kappa_evolution_residuals, physical_energy, sobolev_energies, stability_monitors};
use crate::error::{PilError, Result};
use crate::evolution::{Frame, Problem, SimState, StepRecord, Stepper};
use crate::fields::{interface_dot_normal, leray_project, wall_flux, Fluxes};
use crate::harmonic::{FractionalPowers, Side};
use crate::spectral::{max_abs, Fourier2};
use crate::surface::{
    build_geometry, codazzi_normal_residual, kappa_a_forward, kappa_a_invert, simons_residual, HeightField,
    NewtonOptions,
};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// High-wavenumber shares below this count as spectrally empty when judging
/// growth.
const HIGHK_FLOOR: f64 = 1e-8;

/// A validated config with its assembled problem.
#[derive(Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub problem: Problem,
}

/// A monitor crossing its threshold, recorded at the first row it happens.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flag {
    pub kind: String,
    pub t: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Stop before taking this step and write a checkpoint.
    pub halt_at: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub config_hash: String,
    pub final_state: SimState,
    /// Rows written by this invocation.
    pub rows: usize,
    pub series: PathBuf,
    pub checkpoints: Vec<PathBuf>,
    pub flags: Vec<Flag>,
    pub halted: bool,
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    config_hash: &'a str,
    filter: String,
    t: f64,
    step: u64,
    rows: usize,
    halted: bool,
    flags: &'a [Flag],
    checkpoints: Vec<String>,
}

fn refs(x: &[Vec<f64>; 3]) -> [&[f64]; 3] {
    [&x[0], &x[1], &x[2]]
}

/// Share of `Σ|γ̂_k|²` (k ≠ 0) carried by `|k| > k_max/2`, `k_max` the
/// dealiasing radius.
pub fn high_k_share(grid: &Fourier2, gamma: &[f64]) -> f64 {
    let c = grid.forward(gamma);
    let (ku, kv) = grid.dealias_kmax();
    let cut = 0.5 * ku.min(kv);
    let (mut hi, mut all) = (0.0, 0.0);
    for (p, z) in c.iter().enumerate() {
        let (i, j) = (p / grid.nv, p % grid.nv);
        let k = (grid.ku(i).powi(2) + grid.kv(j).powi(2)).sqrt();
        if k == 0.0 {
            continue;
        }
        let e = z.norm_sqr();
        all += e;
        if k > cut {
            hi += e;
        }
    }
    if all > 0.0 {
        hi / all
    } else {
        0.0
    }
}

fn potential_flow(cfg: &ScenarioConfig, x: [f64; 3]) -> [f64; 3] {
    let d = 1.0 - cfg.geometry.z0;
    let mut v = [cfg.initial.v_mean[0], cfg.initial.v_mean[1], 0.0];
    for m in &cfg.initial.potential {
        let (kx, ky) = (m.k[0] as f64, m.k[1] as f64);
        let k = (kx * kx + ky * ky).sqrt();
        let ph = kx * x[0] + ky * x[1];
        let s = m.amplitude / (k * d).sinh();
        let ch = (k * (1.0 - x[2])).cosh();
        v[0] -= s * kx / k * ph.sin() * ch;
        v[1] -= s * ky / k * ph.sin() * ch;
        v[2] -= s * ph.cos() * (k * (1.0 - x[2])).sinh();
    }
    v
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let problem = config.problem()?;
        Ok(Scenario { config, problem })
    }

    pub fn grid(&self) -> &Fourier2 {
        &self.problem.slab.reference.grid
    }

    /// Initial state: configured `γ`, potential flow plus uniform velocity,
    /// uniform field, projected so that `div = 0`, `h·n = 0` and the wall
    /// fluxes match the fields.
    pub fn initial_state(&self) -> Result<SimState> {
        let cfg = &self.config;
        let gamma = HeightField::new(self.grid(), cfg.initial_gamma(self.grid()))?;
        let frame = Frame::new(&self.problem, &gamma, 0.0, false)?;
        let plus = &frame.plus;
        let n = plus.len();
        let pts: Vec<[f64; 3]> = (0..n).map(|i| potential_flow(cfg, plus.position(i))).collect();
        let v: [Vec<f64>; 3] = std::array::from_fn(|a| pts.iter().map(|x| x[a]).collect());
        let hm = cfg.initial.h_mean;
        let h = [vec![hm[0]; n], vec![hm[1]; n], vec![0.0; n]];
        let vn = interface_dot_normal(plus, refs(&v));
        let (v, _) = leray_project(&self.problem.slab, plus, &frame.geom, refs(&v), &vn)?;
        let (h, _) = leray_project(&self.problem.slab, plus, &frame.geom, refs(&h), &vec![0.0; plus.np()])?;
        let fluxes = Fluxes { v: wall_flux(plus, refs(&v)), h: wall_flux(plus, refs(&h)) };
        Ok(SimState { t0: 0.0, step: 0, t: 0.0, gamma, v, h, fluxes })
    }

    /// Diagnostics row for `state`; updates the accumulator.
    pub fn diagnose(
        &self,
        state: &SimState,
        record: Option<&StepRecord>,
        acc: &mut SeriesAccumulator,
        history: &[SimState],
    ) -> Result<TimeSeriesRow> {
        let cfg = &self.config;
        let pb = &self.problem;
        let frame = Frame::new(pb, &state.gamma, state.t, false)?;
        let mut row = TimeSeriesRow::empty(state.t);
        if cfg.diagnostics.energy {
            let e = physical_energy(pb, state, &frame)?;
            row.set("kinetic", e.kinetic);
            row.set("magnetic_plus", e.magnetic_plus);
            row.set("magnetic_vacuum", e.magnetic_vacuum);
            row.set("surface", e.surface);
            row.set("energy_total", e.total);
            row.set("e_residual", e.e_residual);
            let p = e.input_power.unwrap_or(f64::NAN);
            row.set("input_power", p);
            if state.step == 0 {
                *acc = SeriesAccumulator { e0: e.total, t_prev: state.t, p_prev: p, work: 0.0, ..*acc };
            } else {
                acc.work += 0.5 * (state.t - acc.t_prev) * (p + acc.p_prev);
                acc.t_prev = state.t;
                acc.p_prev = p;
            }
            row.set("budget_residual", e.total - acc.e0 - acc.work);
        }
        let s = stability_monitors(pb, state, &frame)?;
        row.set("rt_min", s.rt_min);
        row.set("upsilon", s.upsilon);
        row.set("wall_gap", s.wall_gap);
        row.set("chart_margin", s.chart_margin);
        row.set("syrovatskij_margin", s.syrovatskij_margin);
        row.set("div_v", max_abs(&frame.plus.div(refs(&state.v))));
        row.set("div_h", max_abs(&frame.plus.div(refs(&state.h))));
        row.set("h_normal", max_abs(&interface_dot_normal(&frame.plus, refs(&state.h))));
        let rec = record.copied().unwrap_or_default();
        row.set("projection_v", rec.projection_v);
        row.set("projection_h", rec.projection_h);
        row.set("v_normal_mean", rec.v_normal_mean);
        row.set("flux_defect", rec.flux_defect);
        row.set("cfl", rec.cfl);
        if cfg.diagnostics.sobolev {
            let e = sobolev_energies(pb, state, &frame, cfg.diagnostics.sobolev_k)?;
            row.set("e_bar_alpha", e.e_bar_alpha);
            row.set("e_l0", e.e_l[0]);
            row.set("e_l1", e.e_l[1]);
            row.set("script_e1", e.script[1]);
            row.set("script_e2", e.script[2]);
            row.set("script_e3", e.script[3]);
        }
        let hk = high_k_share(self.grid(), &state.gamma.values);
        if state.step == 0 {
            acc.highk0 = hk;
        }
        row.set("gamma_highk", hk);
        if cfg.diagnostics.identities && history.len() == 4 {
            let mut w = history.to_vec();
            w.push(state.clone());
            let k = kappa_evolution_residuals(pb, &w, cfg.time.dt, cfg.stepper_config().filter)?;
            row.set("kappa_first_order", k.kappa_first_order);
            row.set("kappa_second_order", k.kappa_second_order);
            row.set("ds_transport", k.ds_transport);
        }
        Ok(row)
    }

    fn flags(&self, row: &TimeSeriesRow, acc: &SeriesAccumulator, flags: &mut Vec<Flag>) {
        let cfg = &self.config;
        let th = &cfg.thresholds;
        let mut raise = |kind: &str, hit: bool, value: f64| {
            if hit && !flags.iter().any(|f| f.kind == kind) {
                flags.push(Flag { kind: kind.into(), t: row.get("t"), value });
            }
        };
        let ups = row.get("upsilon");
        raise("upsilon_below_s0", cfg.physics.alpha == 0.0 && ups < th.s0, ups);
        let rt = row.get("rt_min");
        raise("rt_below_lambda0", self.problem.current.is_zero() && rt < th.lambda0, rt);
        let gap = row.get("wall_gap");
        raise("wall_gap_below_c0", gap < cfg.geometry.c0, gap);
        let cm = row.get("chart_margin");
        raise("chart_margin_negative", cm < 0.0, cm);
        let hk = row.get("gamma_highk");
        let base = acc.highk0.max(HIGHK_FLOOR);
        raise("high_k_growth", hk > th.highk_growth * base, hk / base);
        let bad = row.0.iter().any(|x| x.is_infinite());
        raise("non_finite_diagnostic", bad, f64::NAN);
    }

    fn checkpoint_path(dir: &Path, step: u64) -> PathBuf {
        dir.join(format!("checkpoint_{step:08}.pilc"))
    }

    fn drive(
        &self,
        mut state: SimState,
        mut acc: SeriesAccumulator,
        mut history: Vec<SimState>,
        mut writer: SeriesWriter,
        mut rows: usize,
        opts: &RunOptions,
    ) -> Result<RunSummary> {
        let cfg = &self.config;
        let mut stepper = Stepper::new(&self.problem, cfg.stepper_config())?;
        let total = cfg.total_steps();
        let cadence = cfg.diagnostics.cadence;
        let mut checkpoints = Vec::new();
        let mut flags = Vec::new();
        let keep = cfg.diagnostics.identities;
        let save = |state: &SimState, acc: &SeriesAccumulator, history: &[SimState], cps: &mut Vec<PathBuf>| -> Result<()> {
            let path = Self::checkpoint_path(&opts.out_dir, state.step);
            let c = Checkpoint { config: cfg.clone(), state: state.clone(), acc: *acc, history: history.to_vec() };
            write_checkpoint(&c, &path)?;
            cps.push(path);
            Ok(())
        };
        let mut halted = false;
        while state.step < total {
            if opts.halt_at == Some(state.step) {
                save(&state, &acc, &history, &mut checkpoints)?;
                halted = true;
                break;
            }
            let (next, rec) = stepper.step(&state)?;
            if keep {
                history.push(state);
                if history.len() > 4 {
                    history.remove(0);
                }
            }
            state = next;
            if state.step.is_multiple_of(cadence) {
                let row = self.diagnose(&state, Some(&rec), &mut acc, &history)?;
                self.flags(&row, &acc, &mut flags);
                writer.push(&row)?;
                rows += 1;
            }
            if cfg.output.checkpoint_every > 0 && state.step.is_multiple_of(cfg.output.checkpoint_every) && state.step < total {
                save(&state, &acc, &history, &mut checkpoints)?;
            }
        }
        if !halted {
            save(&state, &acc, &history, &mut checkpoints)?;
        }
        let series = opts.out_dir.join(super::session::SERIES_FILE);
        let hash = cfg.hash();
        let summary = SummaryJson {
            config_hash: &hash,
            filter: cfg.filter_label(),
            t: state.t,
            step: state.step,
            rows,
            halted,
            flags: &flags,
            checkpoints: checkpoints.iter().map(|p| p.display().to_string()).collect(),
        };
        let json = serde_json::to_string_pretty(&summary).map_err(|e| PilError::IoError(e.to_string()))?;
        std::fs::write(opts.out_dir.join(SUMMARY_FILE), json)?;
        Ok(RunSummary { config_hash: hash, final_state: state, rows, series, checkpoints, flags, halted })
    }
}

/// Run a scenario from `t = 0`, writing `series.csv`, checkpoints and
/// `summary.json` into `opts.out_dir`.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunSummary> {
    let sc = Scenario::new(config.clone())?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let state = sc.initial_state()?;
    let mut acc = SeriesAccumulator::default();
    let mut writer = SeriesWriter::create(&opts.out_dir.join(SERIES_FILE), &sc.config)?;
    let row = sc.diagnose(&state, None, &mut acc, &[])?;
    writer.push(&row)?;
    sc.drive(state, acc, Vec::new(), writer, 1, opts)
}

/// Continue a run from a checkpoint, appending to `series.csv` in
/// `opts.out_dir`.
pub fn resume(checkpoint: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let c = read_checkpoint(checkpoint)?;
    let sc = Scenario::new(c.config)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let writer = SeriesWriter::append(&opts.out_dir.join(SERIES_FILE), &sc.config)?;
    sc.drive(c.state, c.acc, c.history, writer, 0, opts)
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub alphas: Vec<f64>,
    pub final_gamma: Vec<Vec<f64>>,
    /// `‖γ_{α_i} - γ_{α_{i+1}}‖_{L²}` at `t_end`.
    pub distances: Vec<f64>,
    pub monotone_decreasing: bool,
}

/// Repeat a run over `alphas`, each in `out_dir/alpha_<i>`, and compare the
/// final interfaces. Writes `sweep.csv` and `spectra.csv`.
pub fn sweep_alpha(config: &ScenarioConfig, alphas: &[f64], out_dir: &Path) -> Result<SweepReport> {
    if alphas.len() < 2 {
        return Err(PilError::validation("alphas", "need at least two values"));
    }
    std::fs::create_dir_all(out_dir)?;
    let finals: Vec<Vec<f64>> = alphas
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mut c = config.clone();
            c.physics.alpha = *a;
            let opts = RunOptions { out_dir: out_dir.join(format!("alpha_{i}")), halt_at: None };
            run_scenario(&c, &opts).map(|s| s.final_state.gamma.values)
        })
        .collect::<Result<_>>()?;
    let grid = Fourier2::new(config.geometry.n_u, config.geometry.n_v);
    let w = grid.du() * grid.dv();
    let distances: Vec<f64> = finals
        .windows(2)
        .map(|p| (p[0].iter().zip(&p[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * w).sqrt())
        .collect();
    let monotone_decreasing = distances.windows(2).all(|d| d[1] < d[0]);
    let mut table = String::from("alpha_a,alpha_b,l2_distance\n");
    for (i, d) in distances.iter().enumerate() {
        table += &format!("{:.16e},{:.16e},{:.16e}\n", alphas[i], alphas[i + 1], d);
    }
    std::fs::write(out_dir.join("sweep.csv"), table)?;
    let (kum, kvm) = grid.dealias_kmax();
    let mut spec = String::from("alpha,k_u,k_v,amplitude\n");
    for (a, g) in alphas.iter().zip(&finals) {
        let c = grid.forward(g);
        let scale = 1.0 / grid.np() as f64;
        for (p, z) in c.iter().enumerate() {
            let (ku, kv) = (grid.ku(p / grid.nv), grid.kv(p % grid.nv));
            if ku.abs() <= kum && kv.abs() <= kvm {
                spec += &format!("{a:.16e},{ku},{kv},{:.16e}\n", z.norm() * scale);
            }
        }
    }
    std::fs::write(out_dir.join("spectra.csv"), spec)?;
    Ok(SweepReport { alphas: alphas.to_vec(), final_gamma: finals, distances, monotone_decreasing })
}

/// One line of the static identity suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{:<28} {:>12.4e}  tol {:>9.2e}  {tag}", self.name, self.value, self.tol)
    }
}

/// Geometric and operator identities on the initial interface, no stepping.
pub fn verify_identities(config: &ScenarioConfig) -> Result<Vec<CheckLine>> {
    let sc = Scenario::new(config.clone())?;
    let slab = &sc.problem.slab;
    let gamma = HeightField::new(sc.grid(), config.initial_gamma(sc.grid()))?;
    let geom = build_geometry(&slab.reference, &gamma)?;
    let mut out = Vec::new();
    let mut line = |name: &str, value: f64, tol: f64| {
        out.push(CheckLine { name: name.into(), value, tol, pass: value <= tol });
    };
    line("simons_residual", simons_residual(&geom), 1e-6);
    line("laplacian_normal_residual", codazzi_normal_residual(&geom), 1e-6);
    let a = config.geometry.a;
    let target = kappa_a_forward(&slab.reference, &gamma, a)?;
    let (back, rep) = kappa_a_invert(&slab.reference, &target, &HeightField::zeros(sc.grid()), NewtonOptions::default())?;
    let err = back.values.iter().zip(&gamma.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    line("kmap_round_trip", err, 1e-8);
    line("kmap_newton_iterations", rep.iterations as f64, 8.0);
    for side in [Side::Plus, Side::Minus] {
        let tag = if side == Side::Plus { "plus" } else { "minus" };
        let grid = slab.harmonic_coordinates(&geom, side)?;
        let dn = slab.dn_operator(&grid, &geom)?;
        line(&format!("dn_{tag}_symmetry"), dn.symmetry_defect, 1e-8);
        line(&format!("dn_{tag}_constants"), dn.kernel_defect, 1e-8);
        let kdim = dn.numerical_kernel_dim(1e-9) as f64;
        line(&format!("dn_{tag}_kernel_dim_minus_1"), (kdim - 1.0).abs(), 0.0);
        if side == Side::Plus {
            let fp = FractionalPowers::new(&dn, &geom, slab.tol)?;
            let neg = fp.eigenvalues().iter().fold(0.0_f64, |m, x| m.max(-x));
            line("surface_operator_negativity", neg, 1e-8);
        }
    }
    Ok(out)
}
