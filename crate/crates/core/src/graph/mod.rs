//! Composite firms from a log of mergers.
//!
//! Firms are nodes and every completed merger is an undirected edge. A
//! composite firm is a connected component of the graph built from all
//! mergers up to the final sample period; its state at an earlier period is
//! the partition of its members induced by the mergers completed by then.
//! Each cell of that partition is an intermediate parent.

mod union_find;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use union_find::UnionFind;

/// Half-year index.
pub type Period = i64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFirm {
    pub firm_id: String,
    pub revenue_by_period: BTreeMap<Period, f64>,
    pub naics_by_period: BTreeMap<Period, String>,
}

impl ComponentFirm {
    pub fn new(firm_id: impl Into<String>) -> Self {
        ComponentFirm { firm_id: firm_id.into(), revenue_by_period: BTreeMap::new(), naics_by_period: BTreeMap::new() }
    }

    /// A firm is present in a period when it has a record for it.
    pub fn is_alive(&self, period: Period) -> bool {
        self.revenue_by_period.contains_key(&period)
    }

    pub fn revenue(&self, period: Period) -> f64 {
        self.revenue_by_period.get(&period).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MergerEvent {
    pub acquirer_id: String,
    pub target_id: String,
    /// First period in which the two firms count as merged.
    pub effective_period: Period,
}

impl MergerEvent {
    pub fn new(acquirer: impl Into<String>, target: impl Into<String>, effective_period: Period) -> Self {
        MergerEvent { acquirer_id: acquirer.into(), target_id: target.into(), effective_period }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSnapshot {
    /// Lexicographically smallest member firm id.
    pub composite_id: String,
    pub period: Period,
    /// Member ids grouped into already-merged clusters. Cells and members
    /// are sorted.
    pub intermediate_parents: Vec<Vec<String>>,
    pub component_count: usize,
    pub hhi: f64,
    /// HHI fell back to equal shares because the composite had no revenue.
    pub hhi_imputed: bool,
    pub naics: Option<String>,
}

impl CompositeSnapshot {
    pub fn members(&self) -> impl Iterator<Item = &String> {
        self.intermediate_parents.iter().flatten()
    }
}

/// Merger concentration measure used as the regressor of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexType {
    Count,
    Hhi,
}

impl std::str::FromStr for IndexType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "count" => Ok(IndexType::Count),
            "hhi" => Ok(IndexType::Hhi),
            other => Err(Error::Parse(format!("unknown index type `{other}` (expected count|hhi)"))),
        }
    }
}

/// Sample bounds `[first, last]` over all firm records.
pub fn sample_bounds(firms: &[ComponentFirm]) -> Option<(Period, Period)> {
    let mut periods = firms.iter().flat_map(|f| f.revenue_by_period.keys().copied());
    let first = periods.next()?;
    Some(periods.fold((first, first), |(lo, hi), p| (lo.min(p), hi.max(p))))
}

/// Firm-id lookup that also validates the event log against it.
struct FirmIndex<'a> {
    ids: HashMap<&'a str, usize>,
}

impl<'a> FirmIndex<'a> {
    fn new(firms: &'a [ComponentFirm]) -> Result<Self> {
        let mut ids = HashMap::with_capacity(firms.len());
        for (i, f) in firms.iter().enumerate() {
            if ids.insert(f.firm_id.as_str(), i).is_some() {
                return Err(Error::InvalidEvent(format!("duplicate firm id `{}`", f.firm_id)));
            }
        }
        Ok(FirmIndex { ids })
    }

    fn get(&self, id: &str) -> Result<usize> {
        self.ids.get(id).copied().ok_or_else(|| Error::UnknownFirm(id.to_string()))
    }

    /// Resolves every event to `(period, acquirer, target)` sorted by period.
    fn edges(&self, events: &[MergerEvent], bounds: Option<(Period, Period)>) -> Result<Vec<(Period, usize, usize)>> {
        let mut edges = Vec::with_capacity(events.len());
        for e in events {
            if e.acquirer_id == e.target_id {
                return Err(Error::InvalidEvent(format!("`{}` merges with itself", e.acquirer_id)));
            }
            if let Some((lo, hi)) = bounds {
                if e.effective_period < lo || e.effective_period > hi {
                    return Err(Error::InvalidEvent(format!(
                        "{} -> {} at period {} is outside the sample [{lo}, {hi}]",
                        e.acquirer_id, e.target_id, e.effective_period
                    )));
                }
            }
            edges.push((e.effective_period, self.get(&e.acquirer_id)?, self.get(&e.target_id)?));
        }
        edges.sort_by_key(|&(p, _, _)| p);
        Ok(edges)
    }
}

fn partition_from_roots(firms: &[ComponentFirm], members: impl Iterator<Item = usize>, uf: &mut UnionFind) -> Vec<Vec<String>> {
    let mut cells: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in members {
        cells.entry(uf.find(i)).or_default().push(firms[i].firm_id.clone());
    }
    let mut cells: Vec<Vec<String>> = cells.into_values().collect();
    for c in &mut cells {
        c.sort();
    }
    cells.sort();
    cells
}

/// Connected components of the merger graph using events effective at or
/// before `as_of`. Never-merged firms come back as singletons.
pub fn build_composites(events: &[MergerEvent], firms: &[ComponentFirm], as_of: Period) -> Result<Vec<Vec<String>>> {
    let index = FirmIndex::new(firms)?;
    let edges = index.edges(events, None)?;
    let mut uf = UnionFind::new(firms.len());
    for &(p, a, b) in &edges {
        if p <= as_of {
            uf.union(a, b);
        }
    }
    Ok(partition_from_roots(firms, 0..firms.len(), &mut uf))
}

/// Per-period state of every composite.
///
/// Composites are fixed by the mergers through the last sample period. For
/// each requested period, a snapshot is emitted for every composite with at
/// least one member present in that period.
pub fn snapshot_series(events: &[MergerEvent], firms: &[ComponentFirm], periods: &[Period]) -> Result<Vec<CompositeSnapshot>> {
    let index = FirmIndex::new(firms)?;
    let bounds = sample_bounds(firms);
    let edges = index.edges(events, bounds)?;

    let mut final_uf = UnionFind::new(firms.len());
    for &(_, a, b) in &edges {
        final_uf.union(a, b);
    }
    let mut composites: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..firms.len() {
        composites.entry(final_uf.find(i)).or_default().push(i);
    }
    // Order composites by canonical id for stable output.
    let mut composites: Vec<(String, Vec<usize>)> = composites
        .into_values()
        .map(|m| {
            let id = m.iter().map(|&i| firms[i].firm_id.as_str()).min().unwrap_or_default().to_string();
            (id, m)
        })
        .collect();
    composites.sort_by(|a, b| a.0.cmp(&b.0));

    let mut periods = periods.to_vec();
    periods.sort_unstable();
    periods.dedup();

    let mut uf = UnionFind::new(firms.len());
    let mut next_edge = 0;
    let mut out = Vec::new();
    for &t in &periods {
        while next_edge < edges.len() && edges[next_edge].0 <= t {
            let (_, a, b) = edges[next_edge];
            uf.union(a, b);
            next_edge += 1;
        }
        for (id, members) in &composites {
            if !members.iter().any(|&i| firms[i].is_alive(t)) {
                continue;
            }
            let cells = partition_from_roots(firms, members.iter().copied(), &mut uf);
            let mut snap = CompositeSnapshot {
                composite_id: id.clone(),
                period: t,
                component_count: cells.len(),
                intermediate_parents: cells,
                hhi: 0.0,
                hhi_imputed: false,
                naics: None,
            };
            let revenues: HashMap<&str, f64> =
                members.iter().map(|&i| (firms[i].firm_id.as_str(), firms[i].revenue(t))).collect();
            let hhi = merger_index_hhi(&snap, &revenues);
            snap.hhi = hhi.value;
            snap.hhi_imputed = hhi.imputed;
            snap.naics = naics_by_revenue(&snap, |id| index.ids.get(id).map(|&i| &firms[i])).ok();
            out.push(snap);
        }
    }
    Ok(out)
}

/// Number of independent clusters inside the composite.
pub fn merger_index_count(snapshot: &CompositeSnapshot) -> usize {
    snapshot.component_count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hhi {
    pub value: f64,
    pub imputed: bool,
}

/// `10000 * sum_k s_k^2` over intermediate parents, where `s_k` is the
/// cluster's share of composite revenue. A composite with no revenue gets
/// equal shares, `10000 / component_count`, and is flagged as imputed.
pub fn merger_index_hhi(snapshot: &CompositeSnapshot, revenues: &HashMap<&str, f64>) -> Hhi {
    let cluster_revenue: Vec<f64> = snapshot
        .intermediate_parents
        .iter()
        .map(|cell| cell.iter().map(|id| revenues.get(id.as_str()).copied().unwrap_or(0.0).max(0.0)).sum())
        .collect();
    let total: f64 = cluster_revenue.iter().sum();
    if total <= 0.0 {
        return Hhi { value: 10_000.0 / snapshot.intermediate_parents.len().max(1) as f64, imputed: true };
    }
    let sum_sq: f64 = cluster_revenue.iter().map(|r| (r / total).powi(2)).sum();
    Hhi { value: 10_000.0 * sum_sq, imputed: false }
}

/// Industry code carrying the most member revenue in the snapshot's period.
/// Ties go to the lexicographically smallest code.
pub fn composite_naics(snapshot: &CompositeSnapshot, firms: &[ComponentFirm]) -> Result<String> {
    let by_id: HashMap<&str, &ComponentFirm> = firms.iter().map(|f| (f.firm_id.as_str(), f)).collect();
    naics_by_revenue(snapshot, |id| by_id.get(id).copied())
}

fn naics_by_revenue<'a>(
    snapshot: &CompositeSnapshot,
    lookup: impl Fn(&str) -> Option<&'a ComponentFirm>,
) -> Result<String> {
    let mut tally: BTreeMap<&str, f64> = BTreeMap::new();
    for id in snapshot.members() {
        let Some(firm) = lookup(id.as_str()) else { continue };
        if let Some(code) = firm.naics_by_period.get(&snapshot.period) {
            *tally.entry(code.as_str()).or_insert(0.0) += firm.revenue(snapshot.period);
        }
    }
    // BTreeMap iterates codes in order, so strict `>` keeps the smallest on ties.
    let mut best: Option<(&str, f64)> = None;
    for (code, rev) in tally {
        if best.is_none_or(|(_, b)| rev > b) {
            best = Some((code, rev));
        }
    }
    best.map(|(c, _)| c.to_string()).ok_or_else(|| Error::NoIndustry(snapshot.composite_id.clone()))
}
