//! Synthetic data written to disk, read back and run end to end, then a
//! small Monte Carlo of the event-study estimator.
//!
//! cargo run --release --example synth_pipeline

use mergelobby::estimate::{event_study, RegressionSpec};
use mergelobby::exposure::InstrumentConfig;
use mergelobby::graph::IndexType;
use mergelobby::io;
use mergelobby::pipeline::{analyze, assemble, augment};
use mergelobby::synth::{generate, SynthConfig};
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("mergelobby-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = SynthConfig { seed: 5, ..SynthConfig::default() };
    let data = generate(&config)?;
    io::write_firms(&dir.join(io::FIRMS_FILE), &data.firms)?;
    io::write_mergers(&dir.join(io::MERGERS_FILE), &data.mergers)?;
    io::write_outcomes(&dir.join(io::OUTCOMES_FILE), &data.outcomes)?;
    println!("wrote {}", dir.display());

    let firms = io::read_firms(&dir.join(io::FIRMS_FILE))?;
    let mergers = io::read_mergers(&dir.join(io::MERGERS_FILE))?;
    let outcomes = io::read_outcomes(&dir.join(io::OUTCOMES_FILE))?;
    let (snapshots, panel) = assemble(&firms, &mergers, &outcomes, IndexType::Count)?;
    let panel = augment(&panel, &snapshots, &InstrumentConfig::default())?;
    let report = analyze(&panel, IndexType::Count, InstrumentConfig::default())?;
    for named in report.event_study.iter().chain(&report.iv) {
        println!("{:28} {:>10.1} ({:.1})", named.label, named.fit.coefficients[0], named.fit.std_errors[0]);
    }
    std::fs::remove_dir_all(&dir)?;

    let spec = RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"]);
    let reps = 40;
    let draws: Vec<(f64, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|seed| {
            let data = generate(&SynthConfig { seed: 1000 + seed, ..SynthConfig::default() }).expect("valid config");
            let (_, panel) = assemble(&data.firms, &data.mergers, &data.outcomes, IndexType::Count).expect("panel");
            let fit = event_study(&spec, &panel).expect("fit");
            let (lo, hi) = fit.ci("merger_index", 0.95).expect("regressor kept");
            (fit.coef("merger_index").unwrap(), (lo..=hi).contains(&config.true_beta_lobby))
        })
        .collect();
    let mean = draws.iter().map(|d| d.0).sum::<f64>() / reps as f64;
    let covered = draws.iter().filter(|d| d.1).count();
    println!("{reps} replications: mean {mean:.0} vs planted {:.0}, coverage {covered}/{reps}", config.true_beta_lobby);
    Ok(())
}
