//! Composite-by-period panel.
//!
//! Firm-level political spending is summed over the members of each
//! composite, so a composite's outcome series is comparable before and after
//! its internal mergers.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ComponentFirm, CompositeSnapshot, IndexType, Period};

/// Name of the one-period-ahead change in the merger index.
pub const LEAD_COLUMN: &str = "d_merger_index_lead";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub firm_id: String,
    pub period: Period,
    pub lobby_spend: f64,
    /// PAC contributions net of refunds; may be slightly negative.
    pub pac_contrib: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub composite_id: String,
    pub period: Period,
    pub y_lobby: f64,
    pub y_pac: f64,
    pub revenue: f64,
    pub merger_index: f64,
    pub naics: String,
    /// Additional named regressors; a missing key is a missing value.
    #[serde(default)]
    pub extra_controls: BTreeMap<String, f64>,
}

impl PanelRow {
    /// Numeric column by name.
    pub fn value(&self, column: &str) -> Option<f64> {
        match column {
            "y_lobby" => Some(self.y_lobby),
            "y_pac" => Some(self.y_pac),
            "revenue" => Some(self.revenue),
            "merger_index" => Some(self.merger_index),
            "period" => Some(self.period as f64),
            other => self.extra_controls.get(other).copied(),
        }
    }

    /// Whether `column` names a known column, present or not in this row.
    pub fn is_column(column: &str, panel: &[PanelRow]) -> bool {
        matches!(column, "y_lobby" | "y_pac" | "revenue" | "merger_index" | "period")
            || panel.iter().any(|r| r.extra_controls.contains_key(column))
    }
}

/// Aggregates outcomes and revenue to one row per snapshot.
///
/// Firms with no outcome record in a period contribute zero. Every outcome
/// record must land in some row, otherwise totals would not be conserved.
pub fn build_panel(
    snapshots: &[CompositeSnapshot],
    outcomes: &[OutcomeRecord],
    firms: &[ComponentFirm],
    index_type: IndexType,
) -> Result<Vec<PanelRow>> {
    let mut member_of: HashMap<&str, &str> = HashMap::new();
    for s in snapshots {
        for m in s.members() {
            member_of.insert(m.as_str(), s.composite_id.as_str());
        }
    }
    let firm_by_id: HashMap<&str, &ComponentFirm> = firms.iter().map(|f| (f.firm_id.as_str(), f)).collect();

    let mut rows = Vec::with_capacity(snapshots.len());
    let mut row_of: HashMap<(&str, Period), usize> = HashMap::with_capacity(snapshots.len());
    for s in snapshots {
        let revenue = s.members().filter_map(|m| firm_by_id.get(m.as_str())).map(|f| f.revenue(s.period)).sum();
        let merger_index = match index_type {
            IndexType::Count => s.component_count as f64,
            IndexType::Hhi => s.hhi,
        };
        if row_of.insert((s.composite_id.as_str(), s.period), rows.len()).is_some() {
            return Err(Error::PeriodMismatch(format!(
                "duplicate snapshot for composite `{}` in period {}",
                s.composite_id, s.period
            )));
        }
        rows.push(PanelRow {
            composite_id: s.composite_id.clone(),
            period: s.period,
            y_lobby: 0.0,
            y_pac: 0.0,
            revenue,
            merger_index,
            naics: s.naics.clone().unwrap_or_default(),
            extra_controls: BTreeMap::new(),
        });
    }

    for o in outcomes {
        let composite = member_of.get(o.firm_id.as_str()).ok_or_else(|| Error::UnknownFirm(o.firm_id.clone()))?;
        let &i = row_of.get(&(*composite, o.period)).ok_or_else(|| {
            Error::PeriodMismatch(format!(
                "outcome for `{}` in period {} has no composite row (`{composite}`)",
                o.firm_id, o.period
            ))
        })?;
        rows[i].y_lobby += o.lobby_spend;
        rows[i].y_pac += o.pac_contrib;
    }
    Ok(rows)
}

/// Adds `MergerIndex_{t+1} - MergerIndex_t` under [`LEAD_COLUMN`]. Rows with
/// no next-period observation get no value and drop out of any regression
/// that uses the column.
pub fn anticipation_column(panel: &[PanelRow]) -> Vec<PanelRow> {
    let index: HashMap<(&str, Period), f64> =
        panel.iter().map(|r| ((r.composite_id.as_str(), r.period), r.merger_index)).collect();
    panel
        .iter()
        .map(|r| {
            let mut row = r.clone();
            if let Some(next) = index.get(&(r.composite_id.as_str(), r.period + 1)) {
                row.extra_controls.insert(LEAD_COLUMN.to_string(), next - r.merger_index);
            }
            row
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeLabel {
    BelowMedian,
    AboveMedian,
}

/// Labels composites by whether their whole-sample revenue is strictly above
/// the median composite total. Ties at the median go below.
pub fn size_split(panel: &[PanelRow]) -> Result<BTreeMap<String, SizeLabel>> {
    if panel.is_empty() {
        return Err(Error::Empty("panel".into()));
    }
    let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
    for r in panel {
        *totals.entry(r.composite_id.as_str()).or_insert(0.0) += r.revenue;
    }
    let mut sorted: Vec<f64> = totals.values().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
    Ok(totals
        .into_iter()
        .map(|(id, total)| {
            let label = if total > median { SizeLabel::AboveMedian } else { SizeLabel::BelowMedian };
            (id.to_string(), label)
        })
        .collect())
}
