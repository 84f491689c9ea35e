//! Fourier collocation on the doubly periodic parameter torus `[0, 2π)²`.
//!
//! Grid functions are stored row-major, `index = iu * nv + jv`. Bulk fields
//! stack `nz` such planes contiguously; every routine here accepts any
//! buffer whose length is a multiple of `nu * nv` and acts plane by plane.

pub use rustfft::num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Uniform `nu × nv` Fourier grid with cached FFT plans.
#[derive(Clone)]
pub struct Fourier2 {
    pub nu: usize,
    pub nv: usize,
    fwd_u: Arc<dyn Fft<f64>>,
    inv_u: Arc<dyn Fft<f64>>,
    fwd_v: Arc<dyn Fft<f64>>,
    inv_v: Arc<dyn Fft<f64>>,
    ku: Vec<f64>,
    kv: Vec<f64>,
}

impl fmt::Debug for Fourier2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fourier2({}x{})", self.nu, self.nv)
    }
}

fn wavenumbers(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 })
        .collect()
}

impl Fourier2 {
    pub fn new(nu: usize, nv: usize) -> Self {
        assert!(nu >= 4 && nv >= 4, "grid too small");
        let mut planner = FftPlanner::new();
        Fourier2 {
            nu,
            nv,
            fwd_u: planner.plan_fft_forward(nu),
            inv_u: planner.plan_fft_inverse(nu),
            fwd_v: planner.plan_fft_forward(nv),
            inv_v: planner.plan_fft_inverse(nv),
            ku: wavenumbers(nu),
            kv: wavenumbers(nv),
        }
    }

    /// Points per plane.
    #[inline]
    pub fn np(&self) -> usize {
        self.nu * self.nv
    }

    pub fn du(&self) -> f64 {
        2.0 * PI / self.nu as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * PI / self.nv as f64
    }

    /// Parameter coordinates of grid point `p`.
    pub fn coords(&self, p: usize) -> (f64, f64) {
        ((p / self.nv) as f64 * self.du(), (p % self.nv) as f64 * self.dv())
    }

    /// Signed wavenumber of row `i` (Nyquist reported as `+n/2`).
    #[inline]
    pub fn ku(&self, i: usize) -> f64 {
        self.ku[i]
    }

    #[inline]
    pub fn kv(&self, j: usize) -> f64 {
        self.kv[j]
    }

    #[inline]
    pub fn is_nyquist_u(&self, i: usize) -> bool {
        self.nu.is_multiple_of(2) && i == self.nu / 2
    }

    #[inline]
    pub fn is_nyquist_v(&self, j: usize) -> bool {
        self.nv.is_multiple_of(2) && j == self.nv / 2
    }

    /// Largest wavenumber kept by the 2/3 rule.
    pub fn dealias_kmax(&self) -> (f64, f64) {
        (((self.nu - 1) / 3) as f64, ((self.nv - 1) / 3) as f64)
    }

    fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }

    fn fft_inplace(&self, buf: &mut [C64], inverse: bool) {
        let np = self.np();
        debug_assert_eq!(buf.len() % np, 0);
        let (fv, fu) = if inverse { (&self.inv_v, &self.inv_u) } else { (&self.fwd_v, &self.fwd_u) };
        fv.process(buf);
        let mut tmp = vec![C64::new(0.0, 0.0); np];
        for plane in buf.chunks_mut(np) {
            Self::transpose(plane, &mut tmp, self.nu, self.nv);
            fu.process(&mut tmp);
            Self::transpose(&tmp, plane, self.nv, self.nu);
        }
    }

    /// Unnormalized forward transform of real data (any number of planes).
    pub fn forward(&self, f: &[f64]) -> Vec<C64> {
        let mut buf: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.fft_inplace(&mut buf, false);
        buf
    }

    /// Normalized inverse transform, returning the real part.
    pub fn inverse(&self, mut c: Vec<C64>) -> Vec<f64> {
        self.fft_inplace(&mut c, true);
        let s = 1.0 / self.np() as f64;
        c.iter().map(|z| z.re * s).collect()
    }

    /// Multiply every plane of `c` by a symbol `m(iu, jv)`.
    pub fn apply_symbol<F: Fn(usize, usize) -> C64>(&self, c: &[C64], m: F) -> Vec<C64> {
        let np = self.np();
        let sym: Vec<C64> = (0..np).map(|p| m(p / self.nv, p % self.nv)).collect();
        c.iter().enumerate().map(|(i, z)| z * sym[i % np]).collect()
    }

    /// Symbol of `∂u^du ∂v^dv`. Odd orders drop the Nyquist mode so that real
    /// data stay real; even orders keep it.
    pub fn diff_symbol(&self, i: usize, j: usize, du: u32, dv: u32) -> C64 {
        let mut z = C64::new(1.0, 0.0);
        if du > 0 {
            if du % 2 == 1 && self.is_nyquist_u(i) {
                return C64::new(0.0, 0.0);
            }
            z *= C64::new(0.0, self.ku[i]).powu(du);
        }
        if dv > 0 {
            if dv % 2 == 1 && self.is_nyquist_v(j) {
                return C64::new(0.0, 0.0);
            }
            z *= C64::new(0.0, self.kv[j]).powu(dv);
        }
        z
    }

    /// Derivative `∂u^du ∂v^dv f` of real data.
    pub fn diff(&self, f: &[f64], du: u32, dv: u32) -> Vec<f64> {
        let c = self.forward(f);
        self.inverse(self.apply_symbol(&c, |i, j| self.diff_symbol(i, j, du, dv)))
    }

    /// Several derivatives sharing one forward transform.
    pub fn diff_many(&self, f: &[f64], orders: &[(u32, u32)]) -> Vec<Vec<f64>> {
        let c = self.forward(f);
        orders
            .iter()
            .map(|&(du, dv)| self.inverse(self.apply_symbol(&c, |i, j| self.diff_symbol(i, j, du, dv))))
            .collect()
    }

    /// `(∂u f, ∂v f)`.
    pub fn grad(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut d = self.diff_many(f, &[(1, 0), (0, 1)]);
        let fv = d.pop().unwrap();
        let fu = d.pop().unwrap();
        (fu, fv)
    }

    /// Zero all modes outside the 2/3-rule square.
    pub fn dealias(&self, f: &[f64]) -> Vec<f64> {
        let (mu, mv) = self.dealias_kmax();
        let c = self.forward(f);
        self.inverse(self.apply_symbol(&c, |i, j| {
            if self.ku[i].abs() <= mu && self.kv[j].abs() <= mv {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Exponential filter `exp(-strength (|k|/k_max)^order)` with `k_max` the
    /// 2/3-rule cutoff.
    pub fn exp_filter(&self, f: &[f64], strength: f64, order: u32) -> Vec<f64> {
        let (mu, mv) = self.dealias_kmax();
        let c = self.forward(f);
        self.inverse(self.apply_symbol(&c, |i, j| {
            let r = ((self.ku[i] / mu).powi(2) + (self.kv[j] / mv).powi(2)).sqrt();
            C64::new((-strength * r.powi(order as i32)).exp(), 0.0)
        }))
    }

    /// Gaussian smoothing with physical width `sigma`.
    pub fn gaussian_smooth(&self, f: &[f64], sigma: f64) -> Vec<f64> {
        let c = self.forward(f);
        self.inverse(self.apply_symbol(&c, |i, j| {
            let k2 = self.ku[i].powi(2) + self.kv[j].powi(2);
            C64::new((-0.5 * sigma * sigma * k2).exp(), 0.0)
        }))
    }

    /// Remove horizontal Nyquist content from every plane.
    pub fn drop_nyquist(&self, f: &[f64]) -> Vec<f64> {
        let c = self.forward(f);
        self.inverse(self.apply_symbol(&c, |i, j| {
            if self.is_nyquist_u(i) || self.is_nyquist_v(j) {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        }))
    }

    /// Plane mean.
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }

    /// Sample a function of the parameter coordinates.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.np())
            .map(|p| {
                let (u, v) = self.coords(p);
                f(u, v)
            })
            .collect()
    }

    /// Spectral Sobolev norm `(Σ (1+|k|²)^s |f̂_k|²)^{1/2}` with `f̂` the
    /// normalized coefficients.
    pub fn sobolev_norm(&self, f: &[f64], s: f64) -> f64 {
        let c = self.forward(&f[..self.np()]);
        let n = self.np() as f64;
        let mut acc = 0.0;
        for (p, z) in c.iter().enumerate() {
            let k2 = self.ku[p / self.nv].powi(2) + self.kv[p % self.nv].powi(2);
            acc += (1.0 + k2).powf(s) * (z.norm_sqr() / (n * n));
        }
        acc.sqrt()
    }
}

/// Maximum absolute value.
pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_trig_mode() {
        let g = Fourier2::new(16, 12);
        let f = g.sample(|u, v| (2.0 * u).sin() * (3.0 * v).cos());
        let fu = g.diff(&f, 1, 0);
        let fvv = g.diff(&f, 0, 2);
        let eu = g.sample(|u, v| 2.0 * (2.0 * u).cos() * (3.0 * v).cos());
        let evv = g.sample(|u, v| -9.0 * (2.0 * u).sin() * (3.0 * v).cos());
        for p in 0..g.np() {
            assert!((fu[p] - eu[p]).abs() < 1e-12);
            assert!((fvv[p] - evv[p]).abs() < 1e-11);
        }
    }

    #[test]
    fn multi_plane_roundtrip() {
        let g = Fourier2::new(8, 8);
        let f: Vec<f64> = (0..3 * g.np()).map(|i| ((i * 37) % 11) as f64).collect();
        let back = g.inverse(g.forward(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_norm_monotone_in_s() {
        let g = Fourier2::new(16, 16);
        let f = g.sample(|u, v| 0.1 * u.sin() + 0.02 * (3.0 * v).cos());
        let a = g.sobolev_norm(&f, 0.0);
        let b = g.sobolev_norm(&f, 1.0);
        let c = g.sobolev_norm(&f, 2.5);
        assert!(a <= b && b <= c);
    }
}
