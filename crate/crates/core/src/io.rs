//! CSV and JSON files read and written by the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ComponentFirm, CompositeSnapshot, MergerEvent, Period};
use crate::panel::{OutcomeRecord, PanelRow};

pub const FIRMS_FILE: &str = "firms.csv";
pub const MERGERS_FILE: &str = "mergers.csv";
pub const OUTCOMES_FILE: &str = "outcomes.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const COMPOSITES_FILE: &str = "composites.csv";
pub const PANEL_FILE: &str = "panel.csv";
pub const TRUTH_FILE: &str = "truth.json";

const PANEL_FIXED: [&str; 7] = ["composite_id", "period", "y_lobby", "y_pac", "revenue", "merger_index", "naics"];

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = reader(path)?;
    rdr.deserialize().map(|r| r.map_err(|e| Error::csv(path, e))).collect()
}

fn write_records<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct FirmRow {
    firm_id: String,
    period: Period,
    revenue: f64,
    naics: String,
}

/// Long format: one row per firm and period.
pub fn read_firms(path: &Path) -> Result<Vec<ComponentFirm>> {
    let mut firms: BTreeMap<String, ComponentFirm> = BTreeMap::new();
    for r in read_records::<FirmRow>(path)? {
        if !(r.revenue.is_finite() && r.revenue >= 0.0) {
            return Err(Error::Parse(format!("{}: negative or non-finite revenue for `{}`", path.display(), r.firm_id)));
        }
        let f = firms.entry(r.firm_id.clone()).or_insert_with(|| ComponentFirm::new(r.firm_id.clone()));
        f.revenue_by_period.insert(r.period, r.revenue);
        if !r.naics.is_empty() {
            f.naics_by_period.insert(r.period, r.naics);
        }
    }
    Ok(firms.into_values().collect())
}

pub fn write_firms(path: &Path, firms: &[ComponentFirm]) -> Result<()> {
    let rows = firms.iter().flat_map(|f| {
        f.revenue_by_period.iter().map(move |(&period, &revenue)| FirmRow {
            firm_id: f.firm_id.clone(),
            period,
            revenue,
            naics: f.naics_by_period.get(&period).cloned().unwrap_or_default(),
        })
    });
    write_records(path, rows)
}

pub fn read_mergers(path: &Path) -> Result<Vec<MergerEvent>> {
    read_records(path)
}

pub fn write_mergers(path: &Path, events: &[MergerEvent]) -> Result<()> {
    write_records(path, events)
}

pub fn read_outcomes(path: &Path) -> Result<Vec<OutcomeRecord>> {
    read_records(path)
}

pub fn write_outcomes(path: &Path, outcomes: &[OutcomeRecord]) -> Result<()> {
    write_records(path, outcomes)
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotRow {
    composite_id: String,
    period: Period,
    component_count: usize,
    hhi: f64,
    hhi_imputed: bool,
    naics: String,
    /// Clusters separated by `|`, members by `+`.
    intermediate_parents: String,
}

pub fn read_snapshots(path: &Path) -> Result<Vec<CompositeSnapshot>> {
    read_records::<SnapshotRow>(path)?
        .into_iter()
        .map(|r| {
            let parents: Vec<Vec<String>> =
                r.intermediate_parents.split('|').map(|c| c.split('+').map(str::to_string).collect()).collect();
            if parents.len() != r.component_count {
                return Err(Error::Parse(format!(
                    "{}: composite `{}` period {} lists {} clusters but component_count {}",
                    path.display(),
                    r.composite_id,
                    r.period,
                    parents.len(),
                    r.component_count
                )));
            }
            Ok(CompositeSnapshot {
                composite_id: r.composite_id,
                period: r.period,
                intermediate_parents: parents,
                component_count: r.component_count,
                hhi: r.hhi,
                hhi_imputed: r.hhi_imputed,
                naics: Some(r.naics).filter(|n| !n.is_empty()),
            })
        })
        .collect()
}

pub fn write_snapshots(path: &Path, snapshots: &[CompositeSnapshot]) -> Result<()> {
    let rows = snapshots.iter().map(|s| SnapshotRow {
        composite_id: s.composite_id.clone(),
        period: s.period,
        component_count: s.component_count,
        hhi: s.hhi,
        hhi_imputed: s.hhi_imputed,
        naics: s.naics.clone().unwrap_or_default(),
        intermediate_parents: s.intermediate_parents.iter().map(|c| c.join("+")).collect::<Vec<_>>().join("|"),
    });
    write_records(path, rows)
}

#[derive(Debug, Serialize, Deserialize)]
struct MembershipRow {
    composite_id: String,
    firm_id: String,
}

/// Composite membership, one row per firm.
pub fn write_composites(path: &Path, composites: &[Vec<String>]) -> Result<()> {
    let rows = composites.iter().flat_map(|members| {
        let id = members.iter().min().cloned().unwrap_or_default();
        members.iter().map(move |m| MembershipRow { composite_id: id.clone(), firm_id: m.clone() })
    });
    write_records(path, rows)
}

pub fn read_composites(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in read_records::<MembershipRow>(path)? {
        groups.entry(r.composite_id).or_default().push(r.firm_id);
    }
    Ok(groups.into_values().collect())
}

/// Fixed columns first, then every extra column in name order; an empty
/// cell is a missing value.
pub fn write_panel(path: &Path, panel: &[PanelRow]) -> Result<()> {
    let extras: BTreeSet<&str> = panel.iter().flat_map(|r| r.extra_controls.keys().map(String::as_str)).collect();
    let mut w = writer(path)?;
    let header: Vec<&str> = PANEL_FIXED.iter().copied().chain(extras.iter().copied()).collect();
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for r in panel {
        let mut record = vec![
            r.composite_id.clone(),
            r.period.to_string(),
            r.y_lobby.to_string(),
            r.y_pac.to_string(),
            r.revenue.to_string(),
            r.merger_index.to_string(),
            r.naics.clone(),
        ];
        record.extend(extras.iter().map(|c| r.extra_controls.get(*c).map(f64::to_string).unwrap_or_default()));
        w.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_panel(path: &Path) -> Result<Vec<PanelRow>> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers().map_err(|e| Error::csv(path, e))?.iter().map(str::to_string).collect();
    for (i, c) in PANEL_FIXED.iter().enumerate() {
        if header.get(i).map(String::as_str) != Some(*c) {
            return Err(Error::Parse(format!("{}: expected column `{c}` at position {}", path.display(), i + 1)));
        }
    }
    let num = |s: &str, col: &str, line: usize| -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::Parse(format!("{}: line {line}: bad number `{s}` in `{col}`", path.display())))
    };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = i + 2;
        let period = rec[1]
            .parse::<Period>()
            .map_err(|_| Error::Parse(format!("{}: line {line}: bad period `{}`", path.display(), &rec[1])))?;
        let mut extra_controls = BTreeMap::new();
        for (j, name) in header.iter().enumerate().skip(PANEL_FIXED.len()) {
            let cell = rec.get(j).unwrap_or("");
            if !cell.is_empty() {
                extra_controls.insert(name.clone(), num(cell, name, line)?);
            }
        }
        out.push(PanelRow {
            composite_id: rec[0].to_string(),
            period,
            y_lobby: num(&rec[2], "y_lobby", line)?,
            y_pac: num(&rec[3], "y_pac", line)?,
            revenue: num(&rec[4], "revenue", line)?,
            merger_index: num(&rec[5], "merger_index", line)?,
            naics: rec[6].to_string(),
            extra_controls,
        });
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
