//! Two-way fixed-effects regressions of spending on the merger index.
//!
//! cargo run --release --example event_study

use mergelobby::estimate::{event_study, FixedEffect, RegressionSpec, SampleFilter};
use mergelobby::graph::IndexType;
use mergelobby::panel::anticipation_column;
use mergelobby::pipeline::assemble;
use mergelobby::synth::{generate, SynthConfig};

fn main() -> mergelobby::Result<()> {
    let config = SynthConfig { anticipation_effect: 0.0, seed: 4, ..SynthConfig::default() };
    let data = generate(&config)?;
    let (_, panel) = assemble(&data.firms, &data.mergers, &data.outcomes, IndexType::Count)?;
    println!("planted effect {:.0} per merger", config.true_beta_lobby);

    let specs = [
        ("baseline", RegressionSpec::two_way("y_lobby", "merger_index", &[])),
        ("revenue control", RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"])),
        (
            "industry trends",
            RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"])
                .with_fe(&[FixedEffect::Composite, FixedEffect::Period, FixedEffect::IndustryTrend]),
        ),
        (
            "above-median size",
            RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"]).with_sample(SampleFilter::AboveMedian),
        ),
        ("PAC", RegressionSpec::two_way("y_pac", "merger_index", &["revenue"])),
    ];
    for (label, spec) in specs {
        let fit = event_study(&spec, &panel)?;
        let (lo, hi) = fit.ci("merger_index", 0.95).expect("regressor kept");
        println!(
            "{label:18} beta {:>10.0}  se {:>8.0}  95% [{lo:>9.0}, {hi:>9.0}]  n {} clusters {}",
            fit.coef("merger_index").unwrap_or(f64::NAN),
            fit.se("merger_index").unwrap_or(f64::NAN),
            fit.n_obs,
            fit.n_clusters
        );
    }

    // Spending should not move ahead of the merger.
    let with_lead = anticipation_column(&panel);
    let fit = event_study(&RegressionSpec::two_way("y_lobby", "merger_index", &["d_merger_index_lead"]), &with_lead)?;
    println!(
        "lead coefficient {:.0} (se {:.0})",
        fit.coef("d_merger_index_lead").unwrap_or(f64::NAN),
        fit.se("d_merger_index_lead").unwrap_or(f64::NAN)
    );
    Ok(())
}
