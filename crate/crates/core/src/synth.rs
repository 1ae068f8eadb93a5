//! Synthetic firms, merger logs and political spending with planted effects.
//!
//! Firms come in merger groups of up to `max_initial_components` members. In
//! every period after the first, one pair of a group's clusters merges with a
//! hazard that rises with an economy-wide merger wave, more so for large
//! groups. The composites are whatever the realized mergers join, so a group
//! that never fully merges yields several composites. Spending follows a
//! linear panel model in the count index with composite effects, an optional
//! lead term and an optional confound that also speeds up mergers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ComponentFirm, MergerEvent, Period};
use crate::panel::OutcomeRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Number of merger groups.
    pub n_composites: usize,
    pub n_periods: usize,
    pub max_initial_components: usize,
    /// Probability that a merger group is a single firm.
    pub single_firm_share: f64,
    /// Number of two-digit sectors.
    pub n_industries: usize,
    pub true_beta_lobby: f64,
    pub true_beta_pac: f64,
    /// Per-period merger probability at a neutral wave.
    pub base_hazard: f64,
    pub wave_amplitude: f64,
    /// Periods per wave cycle.
    pub wave_cycle: f64,
    /// Noise added to the wave, relative to its amplitude.
    pub wave_noise: f64,
    pub compliance_strength: f64,
    pub size_compliance_slope: f64,
    pub anticipation_effect: f64,
    pub confound_strength: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_composites: 500,
            n_periods: 20,
            max_initial_components: 5,
            single_firm_share: 0.72,
            n_industries: 24,
            true_beta_lobby: -60_000.0,
            true_beta_pac: -4_000.0,
            base_hazard: 0.1,
            wave_amplitude: 1.0,
            wave_cycle: 10.0,
            wave_noise: 0.3,
            compliance_strength: 2.0,
            size_compliance_slope: 0.0,
            anticipation_effect: 0.0,
            confound_strength: 0.0,
            noise_sd: 40_000.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if self.n_composites < 2 || self.n_periods < 2 || self.max_initial_components < 1 {
            return bad("n_composites and n_periods must be at least 2, max_initial_components at least 1");
        }
        if !(2..=90).contains(&self.n_industries) {
            return bad("n_industries must be in 2..=90");
        }
        if !(0.0..=1.0).contains(&self.single_firm_share) || !(0.0..=1.0).contains(&self.base_hazard) {
            return bad("single_firm_share and base_hazard must be probabilities");
        }
        if self.compliance_strength < 0.0 || self.noise_sd < 0.0 || self.wave_cycle <= 0.0 {
            return bad("compliance_strength and noise_sd must be nonnegative, wave_cycle positive");
        }
        let all = [
            self.true_beta_lobby,
            self.true_beta_pac,
            self.wave_amplitude,
            self.wave_noise,
            self.size_compliance_slope,
            self.anticipation_effect,
            self.confound_strength,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("parameters must be finite");
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthComposite {
    /// Smallest member firm id; spending is reported under this firm.
    pub composite_id: String,
    pub naics: String,
    pub initial_components: usize,
    pub lobbies: bool,
    pub fe_lobby: f64,
    pub fe_pac: f64,
    /// Compliance of the merger group after the size adjustment.
    pub compliance: f64,
    pub mergers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: SynthConfig,
    pub beta_lobby: f64,
    pub beta_pac: f64,
    pub anticipation_effect: f64,
    pub wave: Vec<f64>,
    pub composites: Vec<TruthComposite>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub firms: Vec<ComponentFirm>,
    pub mergers: Vec<MergerEvent>,
    pub outcomes: Vec<OutcomeRecord>,
    pub truth: GroundTruth,
}

const WAVE_STREAM: u64 = u64::MAX;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Standard normal truncated to [-3, 3].
fn bounded_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let e: f64 = StandardNormal.sample(rng);
        if e.abs() <= 3.0 {
            return e;
        }
    }
}

fn wave_path(config: &SynthConfig) -> Vec<f64> {
    let mut rng = stream(config.seed, WAVE_STREAM);
    (0..config.n_periods)
        .map(|t| {
            let base = (2.0 * PI * t as f64 / config.wave_cycle).sin();
            let noise: f64 = StandardNormal.sample(&mut rng);
            config.wave_amplitude * (base + config.wave_noise * noise)
        })
        .collect()
}

/// A group of firms that may merge during the sample.
struct Group {
    members: Vec<String>,
    naics: String,
    revenue: Vec<f64>,
    log_size: f64,
    /// Per period, the cluster label (smallest member index) of each member.
    labels: Vec<Vec<usize>>,
    confound: Vec<f64>,
    events: Vec<MergerEvent>,
    rng: ChaCha8Rng,
}

fn draw_group(config: &SynthConfig, i: usize) -> Group {
    let mut rng = stream(config.seed, i as u64);
    let k = if config.max_initial_components == 1 || rng.random_bool(config.single_firm_share) {
        1
    } else {
        rng.random_range(2..=config.max_initial_components)
    };
    let sector = 11 + rng.random_range(0..config.n_industries);
    let naics = format!("{sector}{}{}10", rng.random_range(1..4), rng.random_range(1..4));
    let members: Vec<String> = (0..k).map(|m| format!("f{i:05}{}", (b'a' + m as u8) as char)).collect();
    let lognormal = LogNormal::new(6.0, 1.0).expect("valid lognormal");
    let revenue: Vec<f64> = (0..k).map(|_| lognormal.sample(&mut rng)).collect();
    let log_size = revenue.iter().sum::<f64>().ln();
    Group {
        members,
        naics,
        revenue,
        log_size,
        labels: Vec::with_capacity(config.n_periods),
        confound: Vec::with_capacity(config.n_periods),
        events: Vec::new(),
        rng,
    }
}

fn simulate_mergers(config: &SynthConfig, g: &mut Group, wave: &[f64], compliance: f64) {
    let k = g.members.len();
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|m| vec![m]).collect();
    let mut state = 0.0;
    let exposure = k as f64 / config.max_initial_components as f64;
    for (t, &w) in wave.iter().enumerate() {
        // Persistent on/off shock that raises both merger odds and spending.
        if config.confound_strength != 0.0 {
            let flip = if state > 0.0 { 0.25 } else { 0.15 };
            if g.rng.random_bool(flip) {
                state = 1.0 - state;
            }
        }
        if t > 0 && clusters.len() > 1 {
            let hazard = config.base_hazard
                * (1.0 + compliance * exposure * (1.0 + w)).max(0.0)
                * (1.0 + config.confound_strength.abs() * state);
            if g.rng.random::<f64>() < hazard.clamp(0.0, 1.0) {
                let a = g.rng.random_range(0..clusters.len());
                let mut b = g.rng.random_range(0..clusters.len() - 1);
                if b >= a {
                    b += 1;
                }
                let absorbed = clusters[b].clone();
                let acquirer = &g.members[clusters[a][0]];
                let target = &g.members[absorbed[0]];
                g.events.push(MergerEvent::new(acquirer.clone(), target.clone(), t as Period));
                clusters[a].extend(absorbed);
                clusters[a].sort_unstable();
                clusters.remove(b);
            }
        }
        let mut label = vec![0; k];
        for c in &clusters {
            for &m in c {
                label[m] = c[0];
            }
        }
        g.labels.push(label);
        g.confound.push(state);
    }
}

/// Builds the whole dataset. Identical configs give identical data.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let wave = wave_path(config);
    let mut groups: Vec<Group> = (0..config.n_composites).map(|i| draw_group(config, i)).collect();

    let standardize = |xs: &[f64]| -> Vec<f64> {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt().max(1e-12);
        xs.iter().map(|x| (x - mean) / sd).collect()
    };
    let group_size = standardize(&groups.iter().map(|g| g.log_size).collect::<Vec<_>>());
    for (g, size) in groups.iter_mut().zip(&group_size) {
        let compliance = (config.compliance_strength * (1.0 + config.size_compliance_slope * size)).max(0.0);
        simulate_mergers(config, g, &wave, compliance);
    }

    // Realized composites: members sharing a final cluster.
    struct Realized {
        group: usize,
        members: Vec<usize>,
        compliance: f64,
    }
    let mut realized = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let last = g.labels.last().expect("at least one period");
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (m, &l) in last.iter().enumerate() {
            cells.entry(l).or_default().push(m);
        }
        let compliance = (config.compliance_strength * (1.0 + config.size_compliance_slope * group_size[gi])).max(0.0);
        realized.extend(cells.into_values().map(|members| Realized { group: gi, members, compliance }));
    }
    let sizes = standardize(
        &realized.iter().map(|r| r.members.iter().map(|&m| groups[r.group].revenue[m]).sum::<f64>().ln()).collect::<Vec<_>>(),
    );

    let mut outcomes = Vec::new();
    let mut composites = Vec::with_capacity(realized.len());
    let spend = LogNormal::new(11.5, 1.8).expect("valid lognormal");
    let scale = config.true_beta_lobby.abs().max(config.noise_sd).max(1.0);
    for (r, size) in realized.iter().zip(&sizes) {
        let g = &mut groups[r.group];
        let id = g.members[r.members[0]].clone();
        let index: Vec<f64> = g
            .labels
            .iter()
            .map(|labels| {
                let mut seen: Vec<usize> = r.members.iter().map(|&m| labels[m]).collect();
                seen.sort_unstable();
                seen.dedup();
                seen.len() as f64
            })
            .collect();
        let k = r.members.len() as f64;

        // Participation rises with size.
        let p = 1.0 / (1.0 + (-(2.5 * size - 2.6)).exp());
        let lobbies = g.rng.random_bool(p);
        let (fe_lobby, fe_pac) = if lobbies {
            let fe = spend.sample(&mut g.rng);
            (fe, fe * g.rng.random_range(0.02..0.1))
        } else {
            (0.0, 0.0)
        };
        for t in 0..config.n_periods {
            let gap = index[t] - k;
            let lead = index.get(t + 1).map_or(0.0, |next| next - index[t]);
            let shock = config.confound_strength * scale * g.confound[t];
            let mut lobby = config.true_beta_lobby * gap + config.anticipation_effect * lead + shock;
            let mut pac = config.true_beta_pac * gap;
            if lobbies {
                lobby += fe_lobby + config.noise_sd.min(fe_lobby / 3.0) * bounded_normal(&mut g.rng);
                pac += fe_pac + (config.noise_sd * 0.1).min(fe_pac / 3.0) * bounded_normal(&mut g.rng);
            }
            if lobby != 0.0 || pac != 0.0 {
                outcomes.push(OutcomeRecord { firm_id: id.clone(), period: t as Period, lobby_spend: lobby, pac_contrib: pac });
            }
        }
        composites.push(TruthComposite {
            composite_id: id,
            naics: g.naics.clone(),
            initial_components: r.members.len(),
            lobbies,
            fe_lobby,
            fe_pac,
            compliance: r.compliance,
            mergers: r.members.len() - 1,
        });
    }

    let mut firms = Vec::new();
    let mut mergers = Vec::new();
    for g in &mut groups {
        for (m, member) in g.members.iter().enumerate() {
            let mut firm = ComponentFirm::new(member.clone());
            for t in 0..config.n_periods {
                let growth = (0.01 * t as f64 + 0.05 * bounded_normal(&mut g.rng)).exp();
                firm.revenue_by_period.insert(t as Period, g.revenue[m] * growth);
                firm.naics_by_period.insert(t as Period, g.naics.clone());
            }
            firms.push(firm);
        }
        mergers.extend(g.events.iter().cloned());
    }
    mergers.sort_by(|a, b| (a.effective_period, &a.acquirer_id, &a.target_id).cmp(&(b.effective_period, &b.acquirer_id, &b.target_id)));
    composites.sort_by(|a, b| a.composite_id.cmp(&b.composite_id));

    let truth = GroundTruth {
        config: config.clone(),
        beta_lobby: config.true_beta_lobby,
        beta_pac: config.true_beta_pac,
        anticipation_effect: config.anticipation_effect,
        wave,
        composites,
    };
    Ok(SynthData { firms, mergers, outcomes, truth })
}

/// Planted parameters, effects and wave path for `config`.
pub fn ground_truth(config: &SynthConfig) -> Result<GroundTruth> {
    Ok(generate(config)?.truth)
}

impl GroundTruth {
    pub fn composite(&self, id: &str) -> Option<&TruthComposite> {
        self.composites.iter().find(|c| c.composite_id == id)
    }

    /// Share of composites with no spending in any period.
    pub fn never_lobby_share(&self, outcomes: &[OutcomeRecord]) -> f64 {
        let mut spent: BTreeMap<&str, f64> = BTreeMap::new();
        for o in outcomes {
            *spent.entry(o.firm_id.as_str()).or_default() += o.lobby_spend.abs();
        }
        let never = self.composites.iter().filter(|c| spent.get(c.composite_id.as_str()).is_none_or(|&s| s == 0.0)).count();
        never as f64 / self.composites.len() as f64
    }
}
