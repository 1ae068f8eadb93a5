//! Merger-wave instrument: first stage, 2SLS and its diagnostics, with and
//! without a confound that drives both mergers and spending.
//!
//! cargo run --release --example shift_share_iv

use mergelobby::estimate::{event_study, RegressionSpec};
use mergelobby::exposure::{complier_heterogeneity, exclusion_diagnostic, first_stage, tsls, ExposureKind, InstrumentConfig};
use mergelobby::graph::IndexType;
use mergelobby::panel::size_split;
use mergelobby::pipeline::{assemble, augment};
use mergelobby::synth::{generate, SynthConfig};

fn main() -> mergelobby::Result<()> {
    let spec = RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"]);
    for confound in [0.0, 1.0] {
        let config = SynthConfig { confound_strength: confound, n_composites: 1000, seed: 21, ..SynthConfig::default() };
        let data = generate(&config)?;
        let (snapshots, panel) = assemble(&data.firms, &data.mergers, &data.outcomes, IndexType::Count)?;
        println!("confound {confound}: planted {:.0}", config.true_beta_lobby);

        for kind in [ExposureKind::InitialComponentCount, ExposureKind::IndustryAvgInitialCount] {
            let instrumented = augment(&panel, &snapshots, &InstrumentConfig { exposure_kind: kind, ..Default::default() })?;
            let fs = first_stage(&spec, &instrumented)?;
            let iv = tsls(&spec, &instrumented)?;
            println!(
                "  {kind:?}: first-stage F {:.1}, 2SLS {:.0} (se {:.0})",
                fs.first_stage.as_ref().map_or(f64::NAN, |f| f.f_stat),
                iv.coef("merger_index").unwrap_or(f64::NAN),
                iv.se("merger_index").unwrap_or(f64::NAN)
            );
        }
        let ols = event_study(&spec, &panel)?;
        println!("  OLS {:.0} (se {:.0})", ols.coef("merger_index").unwrap_or(f64::NAN), ols.se("merger_index").unwrap_or(f64::NAN));

        let instrumented = augment(&panel, &snapshots, &InstrumentConfig::default())?;
        let ex = exclusion_diagnostic(&instrumented, "exposure", "wave")?;
        println!(
            "  exposure vs wave: levels {:.4} (se {:.4}), differences {:.4} (se {:.4})",
            ex.levels.coefficient, ex.levels.std_error, ex.differences.coefficient, ex.differences.std_error
        );
        let c = complier_heterogeneity(&spec, &instrumented, &size_split(&instrumented)?)?;
        println!("  z x above-median size: {:.3} (t {:.2})", c.coef("z_x_above").unwrap_or(f64::NAN), c.t_stat("z_x_above").unwrap_or(f64::NAN));
    }
    Ok(())
}
