use super::Problem;
use crate::error::Result;
use crate::fields::{interface_trace3, solve_vacuum_field};
use crate::harmonic::{BulkGrid, Side};
use crate::surface::{build_geometry, HeightField, SurfaceGeometry, Vec3Field};

/// Geometry of `Γ_t` with the harmonic-coordinate grids on both sides and
/// the vacuum field at one time.
#[derive(Clone, Debug)]
pub struct Frame {
    pub t: f64,
    pub gamma: Vec<f64>,
    pub geom: SurfaceGeometry,
    pub plus: BulkGrid,
    /// Present when the vacuum field is nonzero or was requested.
    pub minus: Option<BulkGrid>,
    /// `ĥ` on the minus grid, empty when `minus` is `None`.
    pub hhat: [Vec<f64>; 3],
    /// Interface trace of `ĥ` (zeros without a vacuum grid).
    pub hhat_trace: Vec3Field,
}

impl Frame {
    /// Geometry for `γ` and `ĥ` for `Ĵ(t)`; the minus side is built when the
    /// current is nonzero or `with_vacuum` is set.
    pub fn new(problem: &Problem, gamma: &HeightField, t: f64, with_vacuum: bool) -> Result<Self> {
        let slab = &problem.slab;
        let geom = build_geometry(&slab.reference, gamma)?;
        let plus = slab.harmonic_coordinates(&geom, Side::Plus)?;
        let np = plus.np();
        let need = with_vacuum || !problem.current.is_zero();
        let (minus, hhat, hhat_trace) = if need {
            let minus = slab.harmonic_coordinates(&geom, Side::Minus)?;
            let h = solve_vacuum_field(slab, &minus, &problem.current.at(t))?.to_vec3();
            let tr = interface_trace3(&minus, [&h[0], &h[1], &h[2]]);
            (Some(minus), h, tr)
        } else {
            (None, [vec![], vec![], vec![]], [vec![0.0; np], vec![0.0; np], vec![0.0; np]])
        };
        Ok(Frame { t, gamma: gamma.values.clone(), geom, plus, minus, hhat, hhat_trace })
    }

    /// Same geometry, vacuum field re-solved for time `t`.
    pub fn at_time(&self, problem: &Problem, t: f64) -> Result<Self> {
        let mut out = self.clone();
        out.t = t;
        if let Some(minus) = &self.minus {
            let h = solve_vacuum_field(&problem.slab, minus, &problem.current.at(t))?.to_vec3();
            out.hhat_trace = interface_trace3(minus, [&h[0], &h[1], &h[2]]);
            out.hhat = h;
        }
        Ok(out)
    }

    /// True when the frame was built for exactly these height values.
    pub fn geom_matches(&self, gamma: &[f64]) -> bool {
        self.gamma == gamma
    }

    pub fn hhat_ref(&self) -> Option<[&[f64]; 3]> {
        self.minus.as_ref().map(|_| [&self.hhat[0][..], &self.hhat[1][..], &self.hhat[2][..]])
    }
}
