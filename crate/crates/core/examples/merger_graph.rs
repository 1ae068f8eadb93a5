//! Composites from a small merger log, period by period.
//!
//! cargo run --example merger_graph

use std::collections::HashMap;

use mergelobby::graph::{
    build_composites, composite_naics, merger_index_count, merger_index_hhi, snapshot_series, ComponentFirm,
    MergerEvent,
};

fn firm(id: &str, naics: &str, revenue: f64) -> ComponentFirm {
    let mut f = ComponentFirm::new(id);
    for t in 0..4 {
        f.revenue_by_period.insert(t, revenue);
        f.naics_by_period.insert(t, naics.into());
    }
    f
}

fn main() -> mergelobby::Result<()> {
    let firms = vec![
        firm("acme", "325412", 900.0),
        firm("bolt", "325412", 300.0),
        firm("cora", "325414", 50.0),
        firm("dyna", "334413", 400.0),
        firm("echo", "334413", 400.0),
        firm("flux", "522110", 120.0),
    ];
    // bolt joins acme, cora joins bolt, echo joins dyna; flux stays alone.
    let mergers = vec![
        MergerEvent::new("acme", "bolt", 1),
        MergerEvent::new("bolt", "cora", 2),
        MergerEvent::new("dyna", "echo", 3),
    ];

    let composites = build_composites(&mergers, &firms, 3)?;
    println!("final composites: {composites:?}");

    let revenue: HashMap<&str, f64> = firms.iter().map(|f| (f.firm_id.as_str(), f.revenue(0))).collect();
    for s in snapshot_series(&mergers, &firms, &[0, 1, 2, 3])? {
        println!(
            "t={} {:5} parents {:?}  count {}  hhi {:7.1}  naics {}",
            s.period,
            s.composite_id,
            s.intermediate_parents,
            merger_index_count(&s),
            merger_index_hhi(&s, &revenue).value,
            composite_naics(&s, &firms)?,
        );
    }
    Ok(())
}
