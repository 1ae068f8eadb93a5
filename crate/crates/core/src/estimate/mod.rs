//! Panel regressions with absorbed fixed effects and clustered inference.

pub mod linalg;
pub mod within;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::panel::{size_split, PanelRow, SizeLabel};

pub use linalg::{cluster_robust_cov, iv, ols, Dof, LinearFit};
pub use within::{within_transform, Demeaned, FixedEffects};

/// Below this first-stage F the instrument is flagged as weak.
pub const WEAK_INSTRUMENT_F: f64 = 10.0;

/// A demeaned column whose largest entry falls below this fraction of its
/// raw scale is treated as absorbed by the fixed effects.
const VARIATION_TOLERANCE: f64 = 1e-7;

/// Digits of the industry code used for industry-specific trends.
pub const TREND_NAICS_DIGITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedEffect {
    Composite,
    Period,
    /// Industry-specific linear time trend.
    IndustryTrend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFilter {
    #[default]
    All,
    AboveMedian,
    BelowMedian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSpec {
    pub outcome: String,
    #[serde(default = "default_regressor")]
    pub regressor: String,
    #[serde(default)]
    pub controls: Vec<String>,
    #[serde(default = "default_fe")]
    pub fe: Vec<FixedEffect>,
    /// One of `composite_id`, `naics`, `period`.
    #[serde(default = "default_cluster")]
    pub cluster: String,
    #[serde(default)]
    pub sample: SampleFilter,
}

fn default_regressor() -> String {
    "merger_index".into()
}

fn default_fe() -> Vec<FixedEffect> {
    vec![FixedEffect::Composite, FixedEffect::Period]
}

fn default_cluster() -> String {
    "composite_id".into()
}

impl RegressionSpec {
    /// Two-way composite and period effects, clustered by composite.
    pub fn two_way(outcome: &str, regressor: &str, controls: &[&str]) -> Self {
        RegressionSpec {
            outcome: outcome.into(),
            regressor: regressor.into(),
            controls: controls.iter().map(|c| c.to_string()).collect(),
            fe: default_fe(),
            cluster: default_cluster(),
            sample: SampleFilter::All,
        }
    }

    pub fn with_sample(mut self, sample: SampleFilter) -> Self {
        self.sample = sample;
        self
    }

    pub fn with_fe(mut self, fe: &[FixedEffect]) -> Self {
        self.fe = fe.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.controls.iter().any(|c| c == &self.regressor || c == &self.outcome) {
            return Err(Error::InvalidSpec("controls must not repeat the outcome or regressor".into()));
        }
        if self.regressor == self.outcome {
            return Err(Error::InvalidSpec("regressor equals outcome".into()));
        }
        let mut seen = self.controls.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.controls.len() {
            return Err(Error::InvalidSpec("duplicate control".into()));
        }
        cluster_key(&self.cluster, None)?;
        Ok(())
    }
}

fn cluster_key(cluster: &str, row: Option<&PanelRow>) -> Result<String> {
    let key = match (cluster, row) {
        ("composite_id", Some(r)) => r.composite_id.clone(),
        ("naics", Some(r)) => r.naics.clone(),
        ("period", Some(r)) => r.period.to_string(),
        ("composite_id" | "naics" | "period", None) => String::new(),
        (other, _) => return Err(Error::InvalidSpec(format!("unsupported cluster column `{other}`"))),
    };
    Ok(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Ols,
    Iv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStage {
    pub instrument: String,
    pub coefficient: f64,
    pub std_error: f64,
    /// Cluster-robust F on the excluded instrument (squared t).
    pub f_stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub estimator: Estimator,
    pub outcome: String,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub cluster_robust_cov: Vec<Vec<f64>>,
    pub n_obs: usize,
    pub n_clusters: usize,
    /// Within R² of the transformed fit (centered R² without fixed effects).
    pub r_squared: f64,
    pub dropped_singletons: usize,
    pub dropped_columns: Vec<String>,
    pub demeaning_sweeps: usize,
    pub first_stage: Option<FirstStage>,
    pub weak_instrument: bool,
}

impl FitResult {
    fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.coefficients[i])
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.std_errors[i])
    }

    pub fn t_stat(&self, name: &str) -> Option<f64> {
        Some(self.coef(name)? / self.se(name)?)
    }

    /// Two-sided confidence interval with `G - 1` degrees of freedom.
    pub fn ci(&self, name: &str, level: f64) -> Option<(f64, f64)> {
        let (b, s) = (self.coef(name)?, self.se(name)?);
        let dof = (self.n_clusters.max(2) - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, dof).ok()?.inverse_cdf(0.5 + level / 2.0);
        Some((b - t * s, b + t * s))
    }
}

impl fmt::Display for FitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({:?})", self.outcome, self.estimator)?;
        for (i, name) in self.names.iter().enumerate() {
            writeln!(f, "  {:<24} {:>16.4} ({:.4})", name, self.coefficients[i], self.std_errors[i])?;
        }
        writeln!(f, "  N = {}, clusters = {}, R2 = {:.4}", self.n_obs, self.n_clusters, self.r_squared)?;
        if let Some(fs) = &self.first_stage {
            writeln!(f, "  first-stage F = {:.2}", fs.f_stat)?;
        }
        Ok(())
    }
}

/// Numeric design pulled out of a panel, before any transformation.
#[derive(Debug, Clone)]
pub struct Design {
    pub names: Vec<String>,
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    /// Instrument replacing the first column of `x`, if any.
    pub z: Option<Vec<f64>>,
    pub clusters: Vec<usize>,
    pub fe: FixedEffects,
    /// Per absorbed categorical effect, whether its groups nest in clusters.
    pub nested: Vec<bool>,
    pub rows: Vec<usize>,
}

fn dense<K: std::hash::Hash + Eq + Clone>(keys: impl Iterator<Item = K>) -> Vec<usize> {
    let keys: Vec<K> = keys.collect();
    linalg::dense_clusters(&keys).0
}

fn nests_in(groups: &[usize], clusters: &[usize]) -> bool {
    let mut owner: HashMap<usize, usize> = HashMap::new();
    groups.iter().zip(clusters).all(|(&g, &c)| *owner.entry(g).or_insert(c) == c)
}

/// Collects the rows of `panel` usable under `spec`: inside the sample and
/// with every referenced column present.
pub fn design(spec: &RegressionSpec, panel: &[PanelRow], instrument: Option<&str>) -> Result<Design> {
    spec.validate()?;
    if panel.is_empty() {
        return Err(Error::Empty("panel".into()));
    }
    let mut columns = vec![spec.outcome.as_str(), spec.regressor.as_str()];
    columns.extend(spec.controls.iter().map(String::as_str));
    columns.extend(instrument);
    for c in &columns {
        if !PanelRow::is_column(c, panel) {
            return Err(Error::UnknownColumn(c.to_string()));
        }
    }
    let labels: Option<BTreeMap<String, SizeLabel>> = match spec.sample {
        SampleFilter::All => None,
        _ => Some(size_split(panel)?),
    };
    let wanted = match spec.sample {
        SampleFilter::AboveMedian => Some(SizeLabel::AboveMedian),
        SampleFilter::BelowMedian => Some(SizeLabel::BelowMedian),
        SampleFilter::All => None,
    };

    let mut rows = Vec::new();
    for (i, r) in panel.iter().enumerate() {
        if let (Some(labels), Some(want)) = (&labels, wanted) {
            if labels.get(&r.composite_id) != Some(&want) {
                continue;
            }
        }
        if columns.iter().all(|c| r.value(c).is_some_and(f64::is_finite)) {
            rows.push(i);
        }
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!("no usable rows for `{}`", spec.outcome)));
    }

    let take = |col: &str| -> Vec<f64> { rows.iter().map(|&i| panel[i].value(col).unwrap()).collect() };
    let y = take(&spec.outcome);
    let mut names = vec![spec.regressor.clone()];
    names.extend(spec.controls.iter().cloned());
    let mut x: Vec<Vec<f64>> = names.iter().map(|n| take(n)).collect();
    if spec.fe.is_empty() {
        names.push("const".into());
        x.push(vec![1.0; rows.len()]);
    }
    let z = instrument.map(take);

    let keys: Vec<String> = rows.iter().map(|&i| cluster_key(&spec.cluster, Some(&panel[i]))).collect::<Result<_>>()?;
    let (clusters, _) = linalg::dense_clusters(&keys);

    let mut fe = FixedEffects::default();
    let mut nested = Vec::new();
    let mut effects = spec.fe.clone();
    effects.sort();
    effects.dedup();
    for effect in effects {
        match effect {
            FixedEffect::Composite => fe.groups.push(dense(rows.iter().map(|&i| panel[i].composite_id.as_str()))),
            FixedEffect::Period => fe.groups.push(dense(rows.iter().map(|&i| panel[i].period))),
            FixedEffect::IndustryTrend => {
                let ids = dense(rows.iter().map(|&i| {
                    let code = panel[i].naics.as_str();
                    &code[..code.len().min(TREND_NAICS_DIGITS)]
                }));
                let t = rows.iter().map(|&i| panel[i].period as f64).collect();
                fe.trends = Some((ids, t));
            }
        }
    }
    for g in &fe.groups {
        nested.push(nests_in(g, &clusters));
    }
    Ok(Design { names, y, x, z, clusters, fe, nested, rows })
}

impl Design {
    /// Rows in a singleton group of some categorical effect; they are fully
    /// absorbed and carry no information.
    fn singletons(&self) -> usize {
        let mut flagged = vec![false; self.y.len()];
        for g in &self.fe.groups {
            let mut counts: HashMap<usize, usize> = HashMap::new();
            g.iter().for_each(|&k| *counts.entry(k).or_default() += 1);
            for (i, k) in g.iter().enumerate() {
                if counts[k] == 1 {
                    flagged[i] = true;
                }
            }
        }
        flagged.iter().filter(|&&f| f).count()
    }

    /// Degrees of freedom absorbed by fixed effects that are not nested
    /// within clusters.
    fn absorbed_dof(&self) -> usize {
        let mut k = 0;
        let dims = self.fe.groups.len();
        for (g, &nested) in self.fe.groups.iter().zip(&self.nested) {
            if nested {
                continue;
            }
            let levels = g.iter().copied().max().map_or(0, |m| m + 1);
            // With another absorbed effect the intercept is already counted.
            k += if dims > 1 { levels.saturating_sub(1) } else { levels };
        }
        if let Some((ids, _)) = &self.fe.trends {
            let groups = ids.iter().copied().max().map_or(0, |m| m + 1);
            k += if dims > 0 { groups } else { 2 * groups };
        }
        k
    }
}

fn has_variation(raw: &[f64], demeaned: &[f64]) -> bool {
    let scale = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let left = demeaned.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    scale > 0.0 && left > VARIATION_TOLERANCE * scale.max(f64::MIN_POSITIVE)
}

fn fit(spec: &RegressionSpec, panel: &[PanelRow], instrument: Option<&str>) -> Result<FitResult> {
    let d = design(spec, panel, instrument)?;
    let mut raw: Vec<Vec<f64>> = vec![d.y.clone()];
    raw.extend(d.x.iter().cloned());
    raw.extend(d.z.iter().cloned());
    let demeaned = within_transform(&raw, &d.fe);
    if !demeaned.converged {
        log::warn!("within transform hit the sweep cap for `{}`", spec.outcome);
    }
    let k = d.x.len();
    let y = &demeaned.columns[0];
    let xs = &demeaned.columns[1..=k];
    let zs = d.z.as_ref().map(|_| &demeaned.columns[k + 1]);

    if let (Some(name), Some(z)) = (instrument, zs) {
        if !has_variation(d.z.as_ref().unwrap(), z) {
            return Err(Error::NoVariation(name.to_string()));
        }
    }
    if !has_variation(&d.x[0], &xs[0]) {
        return Err(Error::NoVariation(d.names[0].clone()));
    }

    let mut names = Vec::new();
    let mut dropped_columns = Vec::new();
    let mut cols: Vec<&Vec<f64>> = Vec::new();
    for (j, name) in d.names.iter().enumerate() {
        if name == "const" || has_variation(&d.x[j], &xs[j]) {
            names.push(name.clone());
            cols.push(&xs[j]);
        } else {
            log::warn!("{}", Error::NoVariation(name.clone()));
            dropped_columns.push(name.clone());
        }
    }
    let n = y.len();
    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let yv = DVector::from_column_slice(y);

    let (lin, scores) = match zs {
        None => (ols(&x, &yv)?, None),
        Some(z) => {
            let mut zm = x.clone();
            zm.set_column(0, &DVector::from_column_slice(z));
            (iv(&x, &zm, &yv)?, Some(zm))
        }
    };
    if lin.kept.first() != Some(&0) {
        return Err(Error::RankDeficient(vec![names[0].clone()]));
    }
    if !lin.dropped.is_empty() {
        let gone: Vec<String> = lin.dropped.iter().map(|&j| names[j].clone()).collect();
        log::warn!("{}", Error::RankDeficient(gone.clone()));
        dropped_columns.extend(gone);
    }
    let names: Vec<String> = lin.kept.iter().map(|&j| names[j].clone()).collect();
    let x = x.select_columns(&lin.kept);
    let scores = scores.map(|z| z.select_columns(&lin.kept)).unwrap_or_else(|| x.clone());

    let singletons = d.singletons();
    let dof = Dof { n: n - singletons, k: lin.kept.len() + d.absorbed_dof() };
    let cov = cluster_robust_cov(&scores, &lin.residuals, &lin.bread, &d.clusters, dof)?;
    let n_clusters = d.clusters.iter().copied().max().map_or(0, |m| m + 1);

    let ssr = lin.residuals.norm_squared();
    let sst = if d.fe.is_empty() {
        let mean = yv.mean();
        yv.iter().map(|v| (v - mean).powi(2)).sum()
    } else {
        yv.norm_squared()
    };
    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 0.0 };

    let k = names.len();
    Ok(FitResult {
        estimator: if zs.is_some() { Estimator::Iv } else { Estimator::Ols },
        outcome: spec.outcome.clone(),
        coefficients: lin.coefficients.iter().copied().collect(),
        std_errors: (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect(),
        cluster_robust_cov: (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect(),
        names,
        n_obs: n,
        n_clusters,
        r_squared,
        dropped_singletons: singletons,
        dropped_columns,
        demeaning_sweeps: demeaned.sweeps,
        first_stage: None,
        weak_instrument: false,
    })
}

/// Least squares of `spec.outcome` on the regressor and controls after
/// absorbing the fixed effects, with cluster-robust standard errors.
pub fn event_study(spec: &RegressionSpec, panel: &[PanelRow]) -> Result<FitResult> {
    fit(spec, panel, None)
}

/// Regression of the endogenous regressor on `instrument` with the same
/// fixed effects and controls as `spec`, reporting the excluded-instrument F.
pub fn first_stage(spec: &RegressionSpec, panel: &[PanelRow], instrument: &str) -> Result<FitResult> {
    let first_spec = RegressionSpec { outcome: spec.regressor.clone(), regressor: instrument.to_string(), ..spec.clone() };
    let mut first = fit(&first_spec, panel, None)?;
    let (b, s) = (first.coefficients[0], first.std_errors[0]);
    let f_stat = (b / s).powi(2);
    first.weak_instrument = f_stat < WEAK_INSTRUMENT_F;
    first.first_stage = Some(FirstStage { instrument: instrument.to_string(), coefficient: b, std_error: s, f_stat });
    Ok(first)
}

/// Exactly identified IV of `spec.outcome` on the regressor, instrumented by
/// `instrument`, with the same fixed effects and controls in both stages.
pub fn fit_iv(spec: &RegressionSpec, panel: &[PanelRow], instrument: &str) -> Result<FitResult> {
    let first = first_stage(spec, panel, instrument)?;
    let mut result = fit(spec, panel, Some(instrument))?;
    result.weak_instrument = first.weak_instrument;
    result.first_stage = first.first_stage;
    if result.weak_instrument {
        let f = result.first_stage.as_ref().map_or(0.0, |fs| fs.f_stat);
        log::warn!("weak instrument `{instrument}`: first-stage F = {f:.2}");
    }
    Ok(result)
}
