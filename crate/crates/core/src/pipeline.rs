//! End-to-end runs: merger log to panel to regression tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{event_study, FitResult, RegressionSpec, SampleFilter};
use crate::exposure::{
    attach_instrument, build_instrument, complier_heterogeneity, exclusion_diagnostic, first_stage, tsls,
    ExclusionDiagnostic, InstrumentConfig, EXPOSURE_COLUMN, WAVE_COLUMN,
};
use crate::graph::{sample_bounds, snapshot_series, ComponentFirm, CompositeSnapshot, IndexType, MergerEvent, Period};
use crate::panel::{anticipation_column, build_panel, size_split, OutcomeRecord, PanelRow, LEAD_COLUMN};

/// Snapshots and panel over every period in the firm records.
pub fn assemble(
    firms: &[ComponentFirm],
    mergers: &[MergerEvent],
    outcomes: &[OutcomeRecord],
    index_type: IndexType,
) -> Result<(Vec<CompositeSnapshot>, Vec<PanelRow>)> {
    let (lo, hi) = sample_bounds(firms).ok_or_else(|| Error::Empty("firm records".into()))?;
    let periods: Vec<Period> = (lo..=hi).collect();
    let snapshots = snapshot_series(mergers, firms, &periods)?;
    let panel = build_panel(&snapshots, outcomes, firms, index_type)?;
    Ok((snapshots, panel))
}

/// Panel with the lead change and the instrument columns attached.
pub fn augment(panel: &[PanelRow], snapshots: &[CompositeSnapshot], config: &InstrumentConfig) -> Result<Vec<PanelRow>> {
    let with_lead = anticipation_column(panel);
    let series = build_instrument(&with_lead, snapshots, config)?;
    Ok(attach_instrument(&with_lead, &series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub label: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub index_type: IndexType,
    pub instrument: InstrumentConfig,
    pub event_study: Vec<NamedFit>,
    pub size_heterogeneity: Vec<NamedFit>,
    pub anticipation: Vec<NamedFit>,
    pub first_stage: Vec<NamedFit>,
    pub iv: Vec<NamedFit>,
    pub exclusion: ExclusionDiagnostic,
    pub compliers: FitResult,
}

fn named(label: &str, fit: FitResult) -> NamedFit {
    NamedFit { label: label.into(), fit }
}

/// Event-study tables for both outcomes, with and without the revenue control.
pub fn event_study_table(panel: &[PanelRow]) -> Result<Vec<NamedFit>> {
    let mut out = Vec::new();
    for outcome in ["y_lobby", "y_pac"] {
        out.push(named(outcome, event_study(&RegressionSpec::two_way(outcome, "merger_index", &[]), panel)?));
        out.push(named(
            &format!("{outcome}+revenue"),
            event_study(&RegressionSpec::two_way(outcome, "merger_index", &["revenue"]), panel)?,
        ));
    }
    Ok(out)
}

/// Every table on an augmented panel.
pub fn analyze(panel: &[PanelRow], index_type: IndexType, instrument: InstrumentConfig) -> Result<Report> {
    let event = event_study_table(panel)?;

    let mut size = Vec::new();
    for (label, filter) in [("above_median", SampleFilter::AboveMedian), ("below_median", SampleFilter::BelowMedian)] {
        for outcome in ["y_lobby", "y_pac"] {
            let spec = RegressionSpec::two_way(outcome, "merger_index", &["revenue"]).with_sample(filter);
            size.push(named(&format!("{outcome}:{label}"), event_study(&spec, panel)?));
        }
    }

    let mut anticipation = Vec::new();
    for outcome in ["y_lobby", "y_pac"] {
        let spec = RegressionSpec::two_way(outcome, "merger_index", &[LEAD_COLUMN, "revenue"]);
        anticipation.push(named(outcome, event_study(&spec, panel)?));
    }

    let mut fs = Vec::new();
    let mut iv = Vec::new();
    for (label, controls) in [("no_controls", vec![]), ("revenue", vec!["revenue"])] {
        fs.push(named(label, first_stage(&RegressionSpec::two_way("y_lobby", "merger_index", &controls), panel)?));
        for outcome in ["y_lobby", "y_pac"] {
            let spec = RegressionSpec::two_way(outcome, "merger_index", &controls);
            iv.push(named(&format!("{outcome}:{label}"), tsls(&spec, panel)?));
        }
    }

    let exclusion = exclusion_diagnostic(panel, EXPOSURE_COLUMN, WAVE_COLUMN)?;
    let labels = size_split(panel)?;
    let compliers = complier_heterogeneity(&RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"]), panel, &labels)?;

    Ok(Report {
        index_type,
        instrument,
        event_study: event,
        size_heterogeneity: size,
        anticipation,
        first_stage: fs,
        iv,
        exclusion,
        compliers,
    })
}
