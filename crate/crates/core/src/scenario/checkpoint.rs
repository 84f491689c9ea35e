//! Versioned little-endian binary checkpoints; restore is bit-exact.
//!
//! Layout: magic `PILCKPT\0`, format version (u32), config dialect string,
//! config hash (32 bytes), canonical config text, grid sizes, the state,
//! the `γ` spectrum (informational), the series accumulator and the recent
//! state history used by windowed diagnostics.

use super::config::{parse_config, ScenarioConfig, CONFIG_VERSION};
use crate::error::{PilError, Result};
use crate::evolution::SimState;
use crate::fields::Fluxes;
use crate::spectral::Fourier2;
use crate::surface::HeightField;
use std::path::Path;

const MAGIC: &[u8; 8] = b"PILCKPT\0";
pub const CHECKPOINT_FORMAT: u32 = 1;

/// Running totals behind the budget and growth columns.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SeriesAccumulator {
    pub e0: f64,
    pub t_prev: f64,
    pub p_prev: f64,
    /// Trapezoidal `∫P dt` up to `t_prev`.
    pub work: f64,
    /// High-wavenumber share of `γ` at `t = 0`.
    pub highk0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ScenarioConfig,
    pub state: SimState,
    pub acc: SeriesAccumulator,
    /// Up to four states preceding `state`, oldest first.
    pub history: Vec<SimState>,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.0.extend_from_slice(b);
    }
    fn floats(&mut self, f: &[f64]) {
        self.u64(f.len() as u64);
        f.iter().for_each(|x| self.f64(*x));
    }
    fn state(&mut self, s: &SimState) {
        self.f64(s.t0);
        self.u64(s.step);
        self.f64(s.t);
        self.floats(&s.gamma.values);
        s.v.iter().chain(&s.h).for_each(|c| self.floats(c));
        [s.fluxes.v[0], s.fluxes.v[1], s.fluxes.h[0], s.fluxes.h[1]].iter().for_each(|x| self.f64(*x));
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.b.len());
        let end = end.ok_or_else(|| PilError::IoError("truncated checkpoint".into()))?;
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u64()? as usize;
        self.take(n)
    }
    fn floats(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        if n > self.b.len() / 8 {
            return Err(PilError::IoError("corrupt checkpoint length".into()));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn state(&mut self) -> Result<SimState> {
        let t0 = self.f64()?;
        let step = self.u64()?;
        let t = self.f64()?;
        let gamma = HeightField { values: self.floats()? };
        let mut comps = Vec::with_capacity(6);
        for _ in 0..6 {
            comps.push(self.floats()?);
        }
        let mut it = comps.into_iter();
        let mut next3 = || -> [Vec<f64>; 3] { std::array::from_fn(|_| it.next().unwrap()) };
        let v = next3();
        let h = next3();
        let f: Vec<f64> = (0..4).map(|_| self.f64()).collect::<Result<_>>()?;
        Ok(SimState { t0, step, t, gamma, v, h, fluxes: Fluxes { v: [f[0], f[1]], h: [f[2], f[3]] } })
    }
}

fn hex_to_bytes(h: &str) -> Vec<u8> {
    (0..h.len() / 2).map(|i| u8::from_str_radix(&h[2 * i..2 * i + 2], 16).unwrap_or(0)).collect()
}

/// Serialize a checkpoint.
pub fn encode_checkpoint(c: &Checkpoint) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(CHECKPOINT_FORMAT);
    w.bytes(CONFIG_VERSION.as_bytes());
    w.0.extend_from_slice(&hex_to_bytes(&c.config.hash()));
    w.bytes(c.config.canonical_text().as_bytes());
    let g = &c.config.geometry;
    [g.n_u, g.n_v, g.n_z].iter().for_each(|n| w.u64(*n as u64));
    w.state(&c.state);
    let grid = Fourier2::new(g.n_u, g.n_v);
    let spec: Vec<f64> = grid.forward(&c.state.gamma.values).iter().flat_map(|z| [z.re, z.im]).collect();
    w.floats(&spec);
    let a = &c.acc;
    [a.e0, a.t_prev, a.p_prev, a.work, a.highk0].iter().for_each(|x| w.f64(*x));
    w.u64(c.history.len() as u64);
    c.history.iter().for_each(|s| w.state(s));
    w.0
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { b: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(PilError::IoError("not a checkpoint file".into()));
    }
    let format = r.u32()?;
    let dialect = String::from_utf8_lossy(r.bytes()?).to_string();
    if format != CHECKPOINT_FORMAT || dialect != CONFIG_VERSION {
        return Err(PilError::VersionMismatch {
            found: format!("{format}/{dialect}"),
            expected: format!("{CHECKPOINT_FORMAT}/{CONFIG_VERSION}"),
        });
    }
    let hash = r.take(32)?.to_vec();
    let text = std::str::from_utf8(r.bytes()?).map_err(|e| PilError::IoError(e.to_string()))?;
    let mut config = parse_config(text)?;
    if hex_to_bytes(&config.hash()) != hash {
        return Err(PilError::IoError("checkpoint config hash does not match its config".into()));
    }
    let dims: Vec<u64> = (0..3).map(|_| r.u64()).collect::<Result<_>>()?;
    let g = &config.geometry;
    if dims != [g.n_u as u64, g.n_v as u64, g.n_z as u64] {
        return Err(PilError::IoError("checkpoint grid does not match its config".into()));
    }
    let state = r.state()?;
    let _spectrum = r.floats()?;
    let acc: Vec<f64> = (0..5).map(|_| r.f64()).collect::<Result<_>>()?;
    let nh = r.u64()? as usize;
    if nh > 4 {
        return Err(PilError::IoError("corrupt checkpoint history".into()));
    }
    let history = (0..nh).map(|_| r.state()).collect::<Result<_>>()?;
    let np = g.n_u * g.n_v;
    let len = np * g.n_z;
    if state.gamma.values.len() != np || state.v.iter().chain(&state.h).any(|c| c.len() != len) {
        return Err(PilError::IoError("checkpoint field sizes do not match the grid".into()));
    }
    config.output = Default::default();
    Ok(Checkpoint {
        config,
        state,
        acc: SeriesAccumulator { e0: acc[0], t_prev: acc[1], p_prev: acc[2], work: acc[3], highk0: acc[4] },
        history,
    })
}

pub fn write_checkpoint(c: &Checkpoint, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(c))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&std::fs::read(path)?)
}
