//! Drive a preset through the scenario layer: run with a mid-run
//! checkpoint, resume, and read back the series.

use pil::scenario::{preset, read_series, resume, run_scenario, RunOptions, SERIES_FILE};

fn main() -> pil::Result<()> {
    let mut cfg = preset("equilibrium")?;
    cfg.time.t_end = 0.2;
    let dir = std::env::temp_dir().join("pil-example-scenario");
    let halted = run_scenario(&cfg, &RunOptions { out_dir: dir.clone(), halt_at: Some(5) })?;
    println!("halted at step {} into {}", halted.final_state.step, halted.checkpoints[0].display());
    let done = resume(&halted.checkpoints[0], &RunOptions { out_dir: dir.clone(), halt_at: None })?;
    println!("finished at t = {:.3} (config {})", done.final_state.t, &done.config_hash[..12]);
    for row in read_series(&dir.join(SERIES_FILE))? {
        println!("t {:.3}  E {:.12}  budget residual {:+.2e}", row.get("t"), row.get("energy_total"), row.get("budget_residual"));
    }
    Ok(())
}
