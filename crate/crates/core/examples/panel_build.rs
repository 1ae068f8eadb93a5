//! Firm-level spending rolled up to a composite-period panel.
//!
//! cargo run --release --example panel_build

use mergelobby::graph::IndexType;
use mergelobby::panel::size_split;
use mergelobby::pipeline::{assemble, augment};
use mergelobby::exposure::InstrumentConfig;
use mergelobby::synth::{generate, SynthConfig};

fn main() -> mergelobby::Result<()> {
    let data = generate(&SynthConfig { n_composites: 150, n_periods: 10, seed: 11, ..SynthConfig::default() })?;
    println!("{} firms, {} merger events, {} outcome records", data.firms.len(), data.mergers.len(), data.outcomes.len());

    for index in [IndexType::Count, IndexType::Hhi] {
        let (snapshots, panel) = assemble(&data.firms, &data.mergers, &data.outcomes, index)?;
        let firm_total: f64 = data.outcomes.iter().map(|o| o.lobby_spend).sum();
        let panel_total: f64 = panel.iter().map(|r| r.y_lobby).sum();
        println!(
            "{index:?}: {} snapshots, {} rows, spending {firm_total:.0} vs {panel_total:.0}",
            snapshots.len(),
            panel.len()
        );
    }

    let (snapshots, panel) = assemble(&data.firms, &data.mergers, &data.outcomes, IndexType::Count)?;
    let panel = augment(&panel, &snapshots, &InstrumentConfig::default())?;
    let merged = panel.iter().find(|r| r.merger_index > 1.0).map(|r| r.composite_id.clone());
    if let Some(id) = merged {
        println!("\n{:>6} {:>6} {:>12} {:>10} {:>8} {:>8}", "period", "index", "lobby", "revenue", "wave", "z");
        for r in panel.iter().filter(|r| r.composite_id == id) {
            println!(
                "{:>6} {:>6} {:>12.0} {:>10.1} {:>8.3} {:>8.3}",
                r.period,
                r.merger_index,
                r.y_lobby,
                r.revenue,
                r.value("wave").unwrap_or(f64::NAN),
                r.value("z").unwrap_or(f64::NAN)
            );
        }
        println!("composite {id} is {:?}", size_split(&panel)?[&id]);
    }
    Ok(())
}
