//! Diagnostics on a non-collinear magnetic configuration: energy parts,
//! stability monitors and the Sobolev energy family.

use pil::diagnostics::{physical_energy, sobolev_energies, stability_monitors};
use pil::evolution::Frame;
use pil::scenario::{preset, Scenario};

fn main() -> pil::Result<()> {
    let sc = Scenario::new(preset("noncollinear")?)?;
    let state = sc.initial_state()?;
    let frame = Frame::new(&sc.problem, &state.gamma, 0.0, false)?;
    let e = physical_energy(&sc.problem, &state, &frame)?;
    println!(
        "energy: kinetic {:.6} magnetic+ {:.6} vacuum {:.6} surface {:.6} total {:.6}",
        e.kinetic, e.magnetic_plus, e.magnetic_vacuum, e.surface, e.total
    );
    let s = stability_monitors(&sc.problem, &state, &frame)?;
    println!(
        "monitors: rt_min {:.4e} Υ {:.6} wall_gap {:.4} chart_margin {:.4} syrovatskij {:.4}",
        s.rt_min, s.upsilon, s.wall_gap, s.chart_margin, s.syrovatskij_margin
    );
    let so = sobolev_energies(&sc.problem, &state, &frame, 3)?;
    println!("sobolev: E_l {:?} Ē_α {:.6e} ℰ {:?}", so.e_l, so.e_bar_alpha, so.script);
    Ok(())
}
