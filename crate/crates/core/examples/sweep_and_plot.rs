//! A small LP sweep on Gridworld followed by the SVG figures.

use horizon_irl::error::Result;
use horizon_irl::experiment::{run_sweep, summarize, ExperimentConfig};
use horizon_irl::plot::emit_plots;

fn main() -> Result<()> {
    let out_dir = std::env::temp_dir().join("horizon-irl-sweep");
    let config = ExperimentConfig {
        data_percentages: vec![10.0, 50.0],
        grid_size: 6,
        n_environments: 3,
        base_seed: 1,
        out_dir: out_dir.clone(),
        ..ExperimentConfig::default()
    };
    let result = run_sweep(&config)?;
    for s in &result.selections {
        println!(
            "env {} at {:>3}%: cv {:.3} ({} errors), oracle {:.3} ({} errors)",
            s.env_index,
            s.data_percent,
            s.cv_choice.value(),
            s.cv_errors,
            s.oracle_choice.value(),
            s.oracle_errors
        );
    }
    let figures = emit_plots(&summarize(&result.records), &result.selections, &out_dir.join("figures"), None)?;
    println!("{} figures in {}", figures.len(), out_dir.join("figures").display());
    Ok(())
}
