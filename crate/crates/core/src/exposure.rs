//! Shift-share instrument: economy-wide merger waves times initial exposure.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{event_study, first_stage as fit_first_stage, fit_iv, FitResult, FixedEffect, RegressionSpec};
use crate::graph::{CompositeSnapshot, IndexType, Period};
use crate::panel::{PanelRow, SizeLabel};

pub const WAVE_COLUMN: &str = "wave";
pub const EXPOSURE_COLUMN: &str = "exposure";
pub const INSTRUMENT_COLUMN: &str = "z";
pub const INTERACTION_COLUMN: &str = "z_x_above";

/// Industry-code digits defining the peer group for industry-average exposure.
pub const EXPOSURE_NAICS_DIGITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExposureKind {
    /// Component count in the composite's first period.
    #[serde(rename = "initial")]
    InitialComponentCount,
    /// Mean initial component count over the composite's industry.
    #[serde(rename = "industry-avg")]
    IndustryAvgInitialCount,
}

impl FromStr for ExposureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(ExposureKind::InitialComponentCount),
            "industry-avg" => Ok(ExposureKind::IndustryAvgInitialCount),
            other => Err(Error::Parse(format!("unknown exposure kind `{other}` (expected initial|industry-avg)"))),
        }
    }
}

impl fmt::Display for ExposureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExposureKind::InitialComponentCount => "initial",
            ExposureKind::IndustryAvgInitialCount => "industry-avg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentConfig {
    pub exposure_kind: ExposureKind,
    /// Leading industry-code digits that define the wave's excluded group.
    pub industry_digits: usize,
    /// Index used for both the regressor and the wave term.
    pub index_type: IndexType,
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        InstrumentConfig {
            exposure_kind: ExposureKind::InitialComponentCount,
            industry_digits: 2,
            index_type: IndexType::Count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentRow {
    pub composite_id: String,
    pub period: Period,
    pub wave: f64,
    pub exposure: f64,
    pub z: f64,
}

/// Row-aligned with the panel it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentSeries {
    pub config: InstrumentConfig,
    pub rows: Vec<InstrumentRow>,
}

fn prefix(code: &str, digits: usize) -> &str {
    &code[..code.len().min(digits)]
}

/// Per composite: its first period in the panel and its industry code then.
fn first_rows(panel: &[PanelRow]) -> BTreeMap<&str, &PanelRow> {
    let mut first: BTreeMap<&str, &PanelRow> = BTreeMap::new();
    for r in panel {
        let e = first.entry(r.composite_id.as_str()).or_insert(r);
        if r.period < e.period {
            *e = r;
        }
    }
    first
}

/// Composite industry labels, fixed at each composite's first period.
fn industries(panel: &[PanelRow], digits: usize) -> Result<HashMap<&str, &str>> {
    first_rows(panel)
        .into_iter()
        .map(|(id, r)| {
            if r.naics.is_empty() {
                Err(Error::NoIndustry(id.to_string()))
            } else {
                Ok((id, prefix(&r.naics, digits)))
            }
        })
        .collect()
}

/// Leave-own-industry-out mean of the merger index at each row's period,
/// weighting composites equally.
pub fn wave_term(panel: &[PanelRow], industry_digits: usize) -> Result<Vec<f64>> {
    let industry = industries(panel, industry_digits)?;
    let distinct: std::collections::HashSet<&str> = industry.values().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::SingleIndustry);
    }
    // (period, industry) -> (sum, count), and period totals.
    let mut cell: HashMap<(Period, &str), (f64, f64)> = HashMap::new();
    let mut total: HashMap<Period, (f64, f64)> = HashMap::new();
    for r in panel {
        let s = industry[r.composite_id.as_str()];
        let c = cell.entry((r.period, s)).or_default();
        c.0 += r.merger_index;
        c.1 += 1.0;
        let t = total.entry(r.period).or_default();
        t.0 += r.merger_index;
        t.1 += 1.0;
    }
    panel
        .iter()
        .map(|r| {
            let s = industry[r.composite_id.as_str()];
            let (own_sum, own_n) = cell[&(r.period, s)];
            let (sum, n) = total[&r.period];
            if n - own_n < 0.5 {
                return Err(Error::SingleIndustry);
            }
            Ok((sum - own_sum) / (n - own_n))
        })
        .collect()
}

/// Initial exposure per composite.
pub fn exposure_term(
    panel: &[PanelRow],
    snapshots: &[CompositeSnapshot],
    config: &InstrumentConfig,
) -> Result<BTreeMap<String, f64>> {
    let counts: HashMap<(&str, Period), usize> =
        snapshots.iter().map(|s| ((s.composite_id.as_str(), s.period), s.component_count)).collect();
    let first = first_rows(panel);
    let mut initial = BTreeMap::new();
    for (&id, r) in &first {
        let k = counts.get(&(id, r.period)).ok_or_else(|| {
            Error::PeriodMismatch(format!("no snapshot for composite `{id}` in its first period {}", r.period))
        })?;
        initial.insert(id.to_string(), *k as f64);
    }
    if config.exposure_kind == ExposureKind::InitialComponentCount {
        return Ok(initial);
    }
    let mut by_industry: HashMap<&str, (f64, f64)> = HashMap::new();
    for (&id, r) in &first {
        let e = by_industry.entry(prefix(&r.naics, EXPOSURE_NAICS_DIGITS)).or_default();
        e.0 += initial[id];
        e.1 += 1.0;
    }
    Ok(first
        .iter()
        .map(|(&id, r)| {
            let (sum, n) = by_industry[prefix(&r.naics, EXPOSURE_NAICS_DIGITS)];
            (id.to_string(), sum / n)
        })
        .collect())
}

/// `Z_it = W_it * K_i0` for every panel row.
pub fn build_instrument(
    panel: &[PanelRow],
    snapshots: &[CompositeSnapshot],
    config: &InstrumentConfig,
) -> Result<InstrumentSeries> {
    let wave = wave_term(panel, config.industry_digits)?;
    let exposure = exposure_term(panel, snapshots, config)?;
    let rows = panel
        .iter()
        .zip(wave)
        .map(|(r, w)| {
            let k = exposure[&r.composite_id];
            InstrumentRow { composite_id: r.composite_id.clone(), period: r.period, wave: w, exposure: k, z: w * k }
        })
        .collect();
    Ok(InstrumentSeries { config: *config, rows })
}

/// Copies wave, exposure and instrument into the panel's extra columns.
pub fn attach_instrument(panel: &[PanelRow], series: &InstrumentSeries) -> Vec<PanelRow> {
    panel
        .iter()
        .zip(&series.rows)
        .map(|(r, s)| {
            debug_assert_eq!((&r.composite_id, r.period), (&s.composite_id, s.period));
            let mut row = r.clone();
            row.extra_controls.insert(WAVE_COLUMN.into(), s.wave);
            row.extra_controls.insert(EXPOSURE_COLUMN.into(), s.exposure);
            row.extra_controls.insert(INSTRUMENT_COLUMN.into(), s.z);
            row
        })
        .collect()
}

/// Merger index on the instrument with the structural spec's effects and
/// controls.
pub fn first_stage(spec: &RegressionSpec, panel: &[PanelRow]) -> Result<FitResult> {
    fit_first_stage(spec, panel, INSTRUMENT_COLUMN)
}

/// Two-stage least squares of `spec` instrumenting the merger index by `z`.
pub fn tsls(spec: &RegressionSpec, panel: &[PanelRow]) -> Result<FitResult> {
    fit_iv(spec, panel, INSTRUMENT_COLUMN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionRow {
    /// `level` or `difference`.
    pub shock: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub r_squared: f64,
    pub n_obs: usize,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionDiagnostic {
    pub levels: ExclusionRow,
    pub differences: ExclusionRow,
}

fn standardize(values: &[f64]) -> Option<Vec<f64>> {
    let n = values.len() as f64;
    if values.len() < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd <= 1e-12 * mean.abs().max(1.0) {
        return None;
    }
    Some(values.iter().map(|v| (v - mean) / sd).collect())
}

fn exclusion_row(panel: &[PanelRow], k: &str, shock: &str, label: &str) -> Result<ExclusionRow> {
    let usable: Vec<&PanelRow> = panel
        .iter()
        .filter(|r| r.value(k).is_some() && r.value(shock).is_some() && r.revenue.is_finite())
        .collect();
    let ks: Vec<f64> = usable.iter().map(|r| r.value(k).unwrap()).collect();
    let ws: Vec<f64> = usable.iter().map(|r| r.value(shock).unwrap()).collect();
    let ks = standardize(&ks).ok_or_else(|| Error::NoVariation(k.to_string()))?;
    let ws = standardize(&ws).ok_or_else(|| Error::NoVariation(shock.to_string()))?;
    let rows: Vec<PanelRow> = usable
        .iter()
        .zip(ks.iter().zip(&ws))
        .map(|(r, (&kz, &wz))| {
            let mut row = (*r).clone();
            row.extra_controls = BTreeMap::from([("k_std".to_string(), kz), ("w_std".to_string(), wz)]);
            row
        })
        .collect();
    let spec = RegressionSpec::two_way("w_std", "k_std", &["revenue"]).with_fe(&[FixedEffect::Period]);
    let fit = event_study(&spec, &rows)?;
    Ok(ExclusionRow {
        shock: label.into(),
        coefficient: fit.coefficients[0],
        std_error: fit.std_errors[0],
        r_squared: fit.r_squared,
        n_obs: fit.n_obs,
        n_clusters: fit.n_clusters,
    })
}

/// Whether initial exposure predicts the level or the change of the shock.
///
/// Both sides are z-scored over their estimation samples before period
/// effects are absorbed; revenue enters as a control.
pub fn exclusion_diagnostic(panel: &[PanelRow], k: &str, w: &str) -> Result<ExclusionDiagnostic> {
    let levels = exclusion_row(panel, k, w, "level")?;
    let previous: HashMap<(&str, Period), f64> = panel
        .iter()
        .filter_map(|r| r.value(w).map(|v| ((r.composite_id.as_str(), r.period), v)))
        .collect();
    let diff_col = format!("d_{w}");
    let with_diff: Vec<PanelRow> = panel
        .iter()
        .map(|r| {
            let mut row = r.clone();
            if let (Some(now), Some(before)) = (r.value(w), previous.get(&(r.composite_id.as_str(), r.period - 1))) {
                row.extra_controls.insert(diff_col.clone(), now - before);
            }
            row
        })
        .collect();
    let differences = exclusion_row(&with_diff, k, &diff_col, "difference")?;
    Ok(ExclusionDiagnostic { levels, differences })
}

/// First stage with an instrument × above-median-size interaction.
pub fn complier_heterogeneity(
    spec: &RegressionSpec,
    panel: &[PanelRow],
    size_labels: &BTreeMap<String, SizeLabel>,
) -> Result<FitResult> {
    let rows: Vec<PanelRow> = panel
        .iter()
        .map(|r| {
            let mut row = r.clone();
            if let Some(z) = r.value(INSTRUMENT_COLUMN) {
                let above = size_labels.get(&r.composite_id) == Some(&SizeLabel::AboveMedian);
                row.extra_controls.insert(INTERACTION_COLUMN.into(), if above { z } else { 0.0 });
            }
            row
        })
        .collect();
    let mut controls = vec![INTERACTION_COLUMN.to_string()];
    controls.extend(spec.controls.iter().cloned());
    let fs_spec = RegressionSpec {
        outcome: spec.regressor.clone(),
        regressor: INSTRUMENT_COLUMN.into(),
        controls,
        ..spec.clone()
    };
    let fit = event_study(&fs_spec, &rows)?;
    if fit.coef(INTERACTION_COLUMN).is_none() {
        return Err(Error::RankDeficient(vec![INTERACTION_COLUMN.into()]));
    }
    Ok(fit)
}
