use crate::error::{PilError, Result};
use crate::evolution::{Frame, Problem, SimState};
use crate::fields::{curl_particular, interface_dot_normal, solve_time_derivative_vacuum, GaugeStart};
use crate::harmonic::{Bc, BulkGrid};
use crate::spectral::C64;
use crate::surface::SurfaceGeometry;

/// Energy split and the power delivered by the wall current.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub magnetic_plus: f64,
    pub magnetic_vacuum: f64,
    /// `α²·area(Γ_t)`.
    pub surface: f64,
    pub total: f64,
    /// `∫_{Γ₋} Ê·Ĵ dS`; `None` when the electric field could not be built.
    pub input_power: Option<f64>,
    /// Defect of the tangential boundary condition in the `Ê` reconstruction.
    pub e_residual: f64,
    /// Mean of the normal rate removed in the `∂tĥ` solve.
    pub normal_mean_removed: f64,
}

fn half_square_integral(grid: &BulkGrid, f: [&[f64]; 3]) -> f64 {
    let sq: Vec<f64> = (0..grid.len()).map(|i| 0.5 * (f[0][i].powi(2) + f[1][i].powi(2) + f[2][i].powi(2))).collect();
    grid.integrate(&sq)
}

/// Vacuum electric field and the reconstruction defect.
#[derive(Clone, Debug)]
pub struct ElectricField {
    pub e: [Vec<f64>; 3],
    /// Constant horizontal part.
    pub constant: [f64; 2],
    /// `max|∇_Γ g + c - (θ ĥ×n - Ê_p)^⊤|` in chart components.
    pub residual: f64,
}

/// `Ê` with `curl Ê = -∂tĥ`, `div Ê = 0`, `n×Ê = θĥ` on `Γ_t` and
/// `Ê_z = 0` on the bottom wall, built as `Ê_p + ∇χ + c` from an axial-gauge
/// particular solution, a least-squares tangential potential on `Γ_t` and
/// a constant horizontal field.
pub fn vacuum_electric_field(
    problem: &Problem,
    frame: &Frame,
    geom: &SurfaceGeometry,
    theta: &[f64],
    dt_hhat: [&[f64]; 3],
) -> Result<ElectricField> {
    let minus = frame.minus.as_ref().ok_or_else(|| PilError::validation("frame", "vacuum grid missing"))?;
    let f = &minus.grid;
    let np = f.np();
    let n = minus.len();
    let rhs: [Vec<f64>; 3] = std::array::from_fn(|a| dt_hhat[a].iter().map(|x| -x).collect());
    let (ep, _) = curl_particular(minus, [&rhs[0], &rhs[1], &rhs[2]], GaugeStart::Wall);
    let ip = minus.interface_plane() * np;
    let hh = &frame.hhat_trace;
    let nn = &geom.normal;
    // Target tangential field T = θ ĥ×n - Ê_p^⊤ in chart components.
    let mut tu = vec![0.0; np];
    let mut tv = vec![0.0; np];
    for p in 0..np {
        let h = [hh[0][p], hh[1][p], hh[2][p]];
        let m = [nn[0][p], nn[1][p], nn[2][p]];
        let cr = [h[1] * m[2] - h[2] * m[1], h[2] * m[0] - h[0] * m[2], h[0] * m[1] - h[1] * m[0]];
        let e = [ep[0][ip + p], ep[1][ip + p], ep[2][ip + p]];
        let en = e[0] * m[0] + e[1] * m[1] + e[2] * m[2];
        let t: [f64; 3] = std::array::from_fn(|a| theta[p] * cr[a] - (e[a] - en * m[a]));
        tu[p] = (0..3).map(|a| t[a] * geom.tu[a][p]).sum();
        tv[p] = (0..3).map(|a| t[a] * geom.tv[a][p]).sum();
    }
    let c = [f.mean(&tu), f.mean(&tv)];
    let ru: Vec<f64> = (0..np).map(|p| tu[p] - c[0] * geom.tu[0][p] - c[1] * geom.tu[1][p]).collect();
    let rv: Vec<f64> = (0..np).map(|p| tv[p] - c[0] * geom.tv[0][p] - c[1] * geom.tv[1][p]).collect();
    let (hu, hv) = (f.forward(&ru), f.forward(&rv));
    let mut ghat = vec![C64::new(0.0, 0.0); np];
    for p in 0..np {
        let (i, j) = (p / f.nv, p % f.nv);
        let (ku, kv) = (f.ku(i), f.kv(j));
        let k2 = ku * ku + kv * kv;
        let su = if f.is_nyquist_u(i) { 0.0 } else { ku };
        let sv = if f.is_nyquist_v(j) { 0.0 } else { kv };
        if k2 > 0.0 {
            ghat[p] = C64::new(0.0, -1.0) * (hu[p] * su + hv[p] * sv) / k2;
        }
    }
    let g = f.inverse(ghat);
    let (gu, gv) = f.grad(&g);
    let residual = (0..np).map(|p| (gu[p] - ru[p]).abs().max((gv[p] - rv[p]).abs())).fold(0.0, f64::max);
    let src: Vec<f64> = minus.div([&ep[0], &ep[1], &ep[2]]).into_iter().map(|x| -x).collect();
    let wp = minus.wall_plane() * np;
    let wall: Vec<f64> = (0..np).map(|p| ep[2][wp + p]).collect();
    let chi = problem.slab.solve(minus, &src, &Bc::Dirichlet(g), &Bc::Neumann(wall))?;
    let gc = minus.grad(&chi.values);
    let cc = [c[0], c[1], 0.0];
    let e = std::array::from_fn(|a| (0..n).map(|i| ep[a][i] + gc[a][i] + cc[a]).collect());
    Ok(ElectricField { e, constant: c, residual })
}

/// `∫_{Γ₋} Ê·Ĵ dS` on the flat bottom wall.
pub fn wall_power(minus: &BulkGrid, e: [&[f64]; 3], j: [&[f64]; 2]) -> f64 {
    let np = minus.np();
    let wp = minus.wall_plane() * np;
    let w = minus.grid.du() * minus.grid.dv();
    (0..np).map(|p| e[0][wp + p] * j[0][p] + e[1][wp + p] * j[1][p]).sum::<f64>() * w
}

/// Energy parts of a state. `frame` must belong to `state.gamma` and carry
/// the vacuum grid when the current is nonzero.
pub fn physical_energy(problem: &Problem, state: &SimState, frame: &Frame) -> Result<EnergyReport> {
    let plus = &frame.plus;
    let kinetic = half_square_integral(plus, state.v_ref());
    let magnetic_plus = half_square_integral(plus, state.h_ref());
    let surface = problem.alpha * problem.alpha * frame.geom.area();
    let mut rep = EnergyReport { kinetic, magnetic_plus, surface, input_power: Some(0.0), ..Default::default() };
    if let (Some(minus), Some(hhat)) = (frame.minus.as_ref(), frame.hhat_ref()) {
        rep.magnetic_vacuum = half_square_integral(minus, hhat);
        if !problem.current.is_zero() {
            let dj = problem.current.rate(state.t);
            let built = solve_time_derivative_vacuum(&problem.slab, plus, minus, &frame.geom, state.v_ref(), hhat, &dj)
                .and_then(|(dth, vr)| {
                    let theta = interface_dot_normal(plus, state.v_ref());
                    let ef = vacuum_electric_field(problem, frame, &frame.geom, &theta, dth.as_vec3())?;
                    Ok((ef, vr.normal_mean_removed))
                });
            match built {
                Ok((ef, mean)) => {
                    let j = problem.current.at(state.t);
                    rep.input_power = Some(wall_power(minus, [&ef.e[0], &ef.e[1], &ef.e[2]], [&j.j[0], &j.j[1]]));
                    rep.e_residual = ef.residual;
                    rep.normal_mean_removed = mean;
                }
                Err(PilError::EllipticNoConverge { .. }) => rep.input_power = None,
                Err(e) => return Err(e),
            }
        }
    }
    rep.total = rep.kinetic + rep.magnetic_plus + rep.magnetic_vacuum + rep.surface;
    Ok(rep)
}

/// Budget over a window of equally spaced samples `(t, E, P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetReport {
    /// Centered `dE/dt - P` at each interior sample.
    pub pointwise: Vec<f64>,
    /// `E(t_end) - E(t_0) - ∫P dt` (trapezoidal).
    pub integrated: f64,
    /// `∫|P| dt`.
    pub input_work: f64,
}

pub fn energy_budget(t: &[f64], e: &[f64], p: &[f64]) -> Result<BudgetReport> {
    let m = t.len();
    if m < 3 || e.len() != m || p.len() != m {
        return Err(PilError::validation("window", "energy budget needs at least 3 aligned samples"));
    }
    let pointwise = (1..m - 1).map(|i| (e[i + 1] - e[i - 1]) / (t[i + 1] - t[i - 1]) - p[i]).collect();
    let mut work = 0.0;
    let mut abs_work = 0.0;
    for i in 1..m {
        let dt = t[i] - t[i - 1];
        work += 0.5 * dt * (p[i] + p[i - 1]);
        abs_work += 0.5 * dt * (p[i].abs() + p[i - 1].abs());
    }
    Ok(BudgetReport { pointwise, integrated: e[m - 1] - e[0] - work, input_work: abs_work })
}
