//! Command-line front end.
//!
//! Usage errors exit with 2, data and model errors with 1. Errors are
//! reported on stderr as one JSON object naming the offending file when
//! there is one. Set `MERGELOBBY_LOG` (e.g. `info`, `debug`) for logging.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimate::{event_study, FitResult, RegressionSpec};
use crate::exposure::{
    attach_instrument, build_instrument, complier_heterogeneity, exclusion_diagnostic, first_stage, tsls, ExclusionDiagnostic, ExposureKind,
    InstrumentConfig, EXPOSURE_COLUMN, INSTRUMENT_COLUMN, WAVE_COLUMN,
};
use crate::graph::{build_composites, sample_bounds, snapshot_series, IndexType, Period};
use crate::io;
use crate::panel::{anticipation_column, build_panel, size_split, PanelRow};
use crate::pipeline::{analyze, assemble, augment, NamedFit, Report};
use crate::synth::{generate, SynthConfig};
use crate::theory::{
    duopoly_common_equilibrium, duopoly_private_equilibrium, merger_comparative_statics, monopoly_equilibrium,
    transfer_bounds, verify_sweep, ModelParams, SweepConfig, TransferRegime,
};

pub const LOG_ENV: &str = "MERGELOBBY_LOG";

#[derive(Debug, Parser)]
#[command(name = "mergelobby", version, about = "Merger graphs, lobbying panels and the duopoly lobbying model")]
struct Cli {
    /// Print results as JSON and write a JSON copy next to every CSV table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known parameters.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Composites and per-period snapshots from a merger log.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Composite-period panel from snapshots and firm outcomes.
    #[command(subcommand)]
    Panel(PanelCommand),
    /// Event-study and instrumented regressions.
    #[command(subcommand)]
    Estimate(EstimateCommand),
    /// Instrument diagnostics.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
    /// Lobbying equilibria and the grid-oracle sweep.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Every stage from raw files or synthetic data.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
}

#[derive(Debug, Args)]
struct GraphInputs {
    #[arg(long)]
    firms: PathBuf,
    #[arg(long)]
    mergers: PathBuf,
}

#[derive(Debug, Subcommand)]
enum GraphCommand {
    /// Composite membership as of a period (default: end of sample).
    Build {
        #[command(flatten)]
        inputs: GraphInputs,
        #[arg(long)]
        as_of: Option<Period>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-period composite snapshots with both merger indices.
    Snapshot {
        #[command(flatten)]
        inputs: GraphInputs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PanelCommand {
    /// Aggregate firm outcomes to the composite-by-period panel.
    Build {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long)]
        firms: PathBuf,
        #[arg(long, default_value = "count")]
        index: IndexType,
        /// Add the one-period-ahead change in the merger index.
        #[arg(long)]
        lead: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct InstrumentArgs {
    /// Snapshots used for initial exposure.
    #[arg(long)]
    snapshots: PathBuf,
    #[arg(long, default_value = "initial")]
    exposure: ExposureKind,
    /// Index the panel was built with.
    #[arg(long, default_value = "count")]
    index: IndexType,
    /// Leading industry-code digits defining the wave's excluded group.
    #[arg(long, default_value_t = 2)]
    industry_digits: usize,
}

impl InstrumentArgs {
    fn config(&self) -> InstrumentConfig {
        InstrumentConfig { exposure_kind: self.exposure, industry_digits: self.industry_digits, index_type: self.index }
    }
}

#[derive(Debug, Subcommand)]
enum EstimateCommand {
    /// Two-way fixed-effects regression from a TOML spec.
    EventStudy {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shift-share IV with its first stage.
    Iv {
        #[arg(long)]
        panel: PathBuf,
        #[command(flatten)]
        instrument: InstrumentArgs,
        /// Structural spec; defaults to lobbying on the merger index plus revenue.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum DiagnoseCommand {
    /// Exposure-shock balance and complier heterogeneity.
    Iv {
        #[arg(long)]
        panel: PathBuf,
        #[command(flatten)]
        instrument: InstrumentArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum TheoryCommand {
    /// Closed forms against the grid oracle over random admissible parameters.
    Verify {
        #[arg(long, default_value_t = 500)]
        sweep: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.22)]
        k_max: f64,
        /// Writes every draw as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equilibria, transfer bounds and merger comparisons at one point.
    Solve {
        #[arg(long, default_value_t = 1.0)]
        market_size: f64,
        #[arg(long, default_value_t = 1.0)]
        common_effect: f64,
        #[arg(long, default_value_t = 1.0)]
        private_effect: f64,
        #[arg(long, default_value_t = 9.0)]
        common_weight: f64,
        #[arg(long, default_value_t = 9.0)]
        private_weight: f64,
    },
}

#[derive(Debug, Subcommand)]
enum PipelineCommand {
    /// Synthesize or ingest data, then build every table.
    All {
        /// Synthetic data config; omit to read `--data`.
        #[arg(long, conflicts_with = "data")]
        synth: Option<PathBuf>,
        /// Directory holding firms.csv, mergers.csv and outcomes.csv.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "count")]
        index: IndexType,
        #[arg(long, default_value = "initial")]
        exposure: ExposureKind,
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Ctx<'a> {
    json: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit<T: Serialize>(&mut self, value: &T, text: impl FnOnce() -> String) -> Result<()> {
        let body = if self.json {
            serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            text()
        };
        writeln!(self.out, "{}", body.trim_end()).map_err(|e| Error::io("<stdout>", e))
    }

    /// Writes a CSV table, plus a JSON copy when `--json` is on.
    fn table<T: Serialize>(&self, path: &Path, rows: &[TableRow], value: &T) -> Result<()> {
        write_table(path, rows)?;
        if self.json {
            io::write_json(&path.with_extension("json"), value)?;
        }
        Ok(())
    }
}

/// One coefficient of one regression, flattened for CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub table: String,
    pub label: String,
    pub outcome: String,
    pub estimator: String,
    pub term: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Twice the half-year coefficient, for spending outcomes.
    pub annualized: Option<f64>,
    pub n_obs: usize,
    pub n_clusters: usize,
    pub r_squared: f64,
    pub first_stage_f: Option<f64>,
}

pub fn table_rows(table: &str, label: &str, fit: &FitResult) -> Vec<TableRow> {
    let spend = matches!(fit.outcome.as_str(), "y_lobby" | "y_pac");
    fit.names
        .iter()
        .enumerate()
        .map(|(j, term)| {
            let (lo, hi) = fit.ci(term, 0.95).unwrap_or((f64::NAN, f64::NAN));
            TableRow {
                table: table.into(),
                label: label.into(),
                outcome: fit.outcome.clone(),
                estimator: format!("{:?}", fit.estimator).to_lowercase(),
                term: term.clone(),
                coefficient: fit.coefficients[j],
                std_error: fit.std_errors[j],
                ci_low: lo,
                ci_high: hi,
                annualized: spend.then(|| 2.0 * fit.coefficients[j]),
                n_obs: fit.n_obs,
                n_clusters: fit.n_clusters,
                r_squared: fit.r_squared,
                first_stage_f: fit.first_stage.as_ref().map(|f| f.f_stat),
            }
        })
        .collect()
}

fn named_rows(table: &str, fits: &[NamedFit]) -> Vec<TableRow> {
    fits.iter().flat_map(|n| table_rows(table, &n.label, &n.fit)).collect()
}

fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn render(rows: &[TableRow]) -> String {
    let mut s = String::new();
    let mut last = String::new();
    for r in rows {
        let head = format!("{} {} [{}]", r.table, r.label, r.estimator);
        if head != last {
            s.push_str(&format!("{head}: N={} clusters={} R2={:.4}", r.n_obs, r.n_clusters, r.r_squared));
            if let Some(f) = r.first_stage_f {
                s.push_str(&format!(" F={f:.1}"));
            }
            s.push('\n');
            last = head;
        }
        s.push_str(&format!("  {:<22} {:>14.4} ({:.4})", r.term, r.coefficient, r.std_error));
        if let Some(a) = r.annualized {
            s.push_str(&format!("  per year {a:.1}"));
        }
        s.push('\n');
    }
    s
}

fn exclusion_rows(d: &ExclusionDiagnostic) -> Vec<TableRow> {
    [&d.levels, &d.differences]
        .iter()
        .map(|r| TableRow {
            table: "exclusion".into(),
            label: r.shock.clone(),
            outcome: WAVE_COLUMN.into(),
            estimator: "ols".into(),
            term: format!("{EXPOSURE_COLUMN}_std"),
            coefficient: r.coefficient,
            std_error: r.std_error,
            ci_low: r.coefficient - 1.96 * r.std_error,
            ci_high: r.coefficient + 1.96 * r.std_error,
            annualized: None,
            n_obs: r.n_obs,
            n_clusters: r.n_clusters,
            r_squared: r.r_squared,
            first_stage_f: None,
        })
        .collect()
}

fn with_instrument(panel: Vec<PanelRow>, args: &InstrumentArgs) -> Result<Vec<PanelRow>> {
    if panel.iter().all(|r| r.extra_controls.contains_key(INSTRUMENT_COLUMN)) {
        return Ok(panel);
    }
    let snapshots = io::read_snapshots(&args.snapshots)?;
    let base = panel;
    let series = build_instrument(&base, &snapshots, &args.config())?;
    Ok(attach_instrument(&base, &series))
}

fn default_iv_spec() -> RegressionSpec {
    RegressionSpec::two_way("y_lobby", "merger_index", &["revenue"])
}

#[derive(Serialize)]
struct IvOutput {
    config: InstrumentConfig,
    first_stage: FitResult,
    iv: FitResult,
    ols: FitResult,
}

#[derive(Serialize)]
struct VerifySummary {
    draws: usize,
    seed: u64,
    k_max: f64,
    max_gap: f64,
    max_gap_common: f64,
    max_gap_private: f64,
    max_gap_monopoly: f64,
    common_statics_pass: usize,
    private_statics_pass: usize,
    nonnegative_pass: usize,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SolveOutput {
    params: ModelParams,
    k_common: f64,
    k_private: f64,
    common: crate::theory::EquilibriumSolution,
    private: crate::theory::EquilibriumSolution,
    monopoly: crate::theory::EquilibriumSolution,
    common_bounds: crate::theory::TransferBounds,
    private_bounds: crate::theory::TransferBounds,
    statics: crate::theory::MergerStatics,
}

#[derive(Serialize)]
struct PipelineOutput<'a> {
    out_dir: &'a Path,
    composites: usize,
    panel_rows: usize,
    report: &'a Report,
}

fn dispatch(cli: Cli, ctx: &mut Ctx) -> Result<()> {
    match cli.command {
        Command::Synth { config, out, seed } => {
            let mut cfg: SynthConfig = match &config {
                Some(p) => io::read_toml(p)?,
                None => SynthConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let data = generate(&cfg)?;
            write_dataset(&out, &data)?;
            ctx.emit(
                &json!({
                    "out_dir": out,
                    "firms": data.firms.len(),
                    "mergers": data.mergers.len(),
                    "outcomes": data.outcomes.len(),
                    "composites": data.truth.composites.len(),
                    "seed": cfg.seed,
                }),
                || format!("wrote {} firms, {} mergers, {} outcome records to {}", data.firms.len(), data.mergers.len(), data.outcomes.len(), out.display()),
            )
        }
        Command::Graph(GraphCommand::Build { inputs, as_of, out }) => {
            let firms = io::read_firms(&inputs.firms)?;
            let events = io::read_mergers(&inputs.mergers)?;
            let as_of = match as_of {
                Some(p) => p,
                None => sample_bounds(&firms).map_or(Period::MAX, |(_, hi)| hi),
            };
            let composites = build_composites(&events, &firms, as_of)?;
            io::write_composites(&out, &composites)?;
            let multi = composites.iter().filter(|c| c.len() > 1).count();
            ctx.emit(&json!({ "composites": composites.len(), "merged": multi, "as_of": as_of, "out": out }), || {
                format!("{} composites ({multi} with mergers) as of {as_of}", composites.len())
            })
        }
        Command::Graph(GraphCommand::Snapshot { inputs, out }) => {
            let firms = io::read_firms(&inputs.firms)?;
            let events = io::read_mergers(&inputs.mergers)?;
            let (lo, hi) = sample_bounds(&firms).ok_or_else(|| Error::Empty(inputs.firms.display().to_string()))?;
            let snapshots = snapshot_series(&events, &firms, &(lo..=hi).collect::<Vec<_>>())?;
            io::write_snapshots(&out, &snapshots)?;
            ctx.emit(&json!({ "snapshots": snapshots.len(), "first_period": lo, "last_period": hi, "out": out }), || {
                format!("{} snapshots over periods {lo}..={hi}", snapshots.len())
            })
        }
        Command::Panel(PanelCommand::Build { snapshots, outcomes, firms, index, lead, out }) => {
            let snaps = io::read_snapshots(&snapshots)?;
            let outcomes = io::read_outcomes(&outcomes)?;
            let firms = io::read_firms(&firms)?;
            let mut panel = build_panel(&snaps, &outcomes, &firms, index)?;
            if lead {
                panel = anticipation_column(&panel);
            }
            io::write_panel(&out, &panel)?;
            let composites = size_split(&panel)?.len();
            ctx.emit(&json!({ "rows": panel.len(), "composites": composites, "index": index, "out": out }), || {
                format!("{} panel rows for {composites} composites", panel.len())
            })
        }
        Command::Estimate(EstimateCommand::EventStudy { panel, spec, out }) => {
            let rows = io::read_panel(&panel)?;
            let spec: RegressionSpec = io::read_toml(&spec)?;
            let fit = event_study(&spec, &rows)?;
            let table = table_rows("event_study", &spec.outcome, &fit);
            if let Some(path) = &out {
                ctx.table(path, &table, &fit)?;
            }
            ctx.emit(&fit, || render(&table))
        }
        Command::Estimate(EstimateCommand::Iv { panel, instrument, spec, out }) => {
            let rows = with_instrument(io::read_panel(&panel)?, &instrument)?;
            let spec = match &spec {
                Some(p) => io::read_toml(p)?,
                None => default_iv_spec(),
            };
            let output = IvOutput {
                config: instrument.config(),
                first_stage: first_stage(&spec, &rows)?,
                iv: tsls(&spec, &rows)?,
                ols: event_study(&spec, &rows)?,
            };
            let mut table = table_rows("first_stage", &instrument.exposure.to_string(), &output.first_stage);
            table.extend(table_rows("iv", &instrument.exposure.to_string(), &output.iv));
            table.extend(table_rows("ols", &instrument.exposure.to_string(), &output.ols));
            if let Some(path) = &out {
                ctx.table(path, &table, &output)?;
            }
            ctx.emit(&output, || render(&table))
        }
        Command::Diagnose(DiagnoseCommand::Iv { panel, instrument, out }) => {
            let rows = with_instrument(io::read_panel(&panel)?, &instrument)?;
            let exclusion = exclusion_diagnostic(&rows, EXPOSURE_COLUMN, WAVE_COLUMN)?;
            let labels = size_split(&rows)?;
            let compliers = complier_heterogeneity(&default_iv_spec(), &rows, &labels)?;
            let mut table = exclusion_rows(&exclusion);
            table.extend(table_rows("compliers", &instrument.exposure.to_string(), &compliers));
            let value = json!({ "exclusion": exclusion, "compliers": compliers });
            if let Some(path) = &out {
                ctx.table(path, &table, &value)?;
            }
            ctx.emit(&value, || render(&table))
        }
        Command::Theory(TheoryCommand::Verify { sweep, seed, k_max, out }) => {
            let config = SweepConfig { draws: sweep, seed, k_max };
            let report = verify_sweep(&config)?;
            if let Some(path) = &out {
                let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
                for r in &report.rows {
                    w.serialize(FlatSweepRow::from(r)).map_err(|e| Error::csv(path, e))?;
                }
                w.flush().map_err(|e| Error::io(path, e))?;
                if ctx.json {
                    io::write_json(&path.with_extension("json"), &report)?;
                }
            }
            let tolerance = 1e-4;
            let summary = VerifySummary {
                draws: report.draws,
                seed,
                k_max,
                max_gap: report.max_gap,
                max_gap_common: report.max_gap_common,
                max_gap_private: report.max_gap_private,
                max_gap_monopoly: report.max_gap_monopoly,
                common_statics_pass: report.common_statics_pass,
                private_statics_pass: report.private_statics_pass,
                nonnegative_pass: report.nonnegative_pass,
                tolerance,
                pass: report.max_gap < tolerance
                    && report.common_statics_pass == report.draws
                    && report.private_statics_pass == report.draws,
            };
            ctx.emit(&summary, || {
                format!(
                    "{} draws: max oracle gap {:.2e} (tolerance {tolerance:.0e}); merger statics hold in {}/{} common, {}/{} private draws",
                    summary.draws, summary.max_gap, summary.common_statics_pass, summary.draws, summary.private_statics_pass, summary.draws
                )
            })
        }
        Command::Theory(TheoryCommand::Solve { market_size, common_effect, private_effect, common_weight, private_weight }) => {
            let params = ModelParams::new(market_size, common_effect, private_effect, common_weight, private_weight)?;
            let output = SolveOutput {
                params,
                k_common: params.k_common(),
                k_private: params.k_private(),
                common: duopoly_common_equilibrium(&params)?,
                private: duopoly_private_equilibrium(&params)?,
                monopoly: monopoly_equilibrium(&params)?,
                common_bounds: transfer_bounds(&params, TransferRegime::Common)?,
                private_bounds: transfer_bounds(&params, TransferRegime::Private)?,
                statics: merger_comparative_statics(&params)?,
            };
            ctx.emit(&output, || {
                format!(
                    "k_R = {:.6}, k_F = {:.6}\n\
                     common:   R* = {:.9}, transfers = {:.9}\n\
                     private:  F* = {:.9}, transfers = {:.9}\n\
                     monopoly: R = {:.9}, F1 = {:.9}, transfer = {:.9}\n\
                     merger raises common policy by {:.9} and common lobbying by {:.9}\n\
                     merger raises private policy by {:.9} and changes private lobbying by {:.9}",
                    output.k_common,
                    output.k_private,
                    output.common.policy.common,
                    output.common.total_transfers,
                    output.private.policy.private[0],
                    output.private.total_transfers,
                    output.monopoly.policy.common,
                    output.monopoly.policy.private[0],
                    output.monopoly.total_transfers,
                    output.statics.common.policy_margin,
                    output.statics.common.transfer_margin,
                    output.statics.private.policy_margin,
                    output.statics.private.transfer_margin,
                )
            })
        }
        Command::Pipeline(PipelineCommand::All { synth, data, out, index, exposure, seed }) => {
            let (firms, mergers, outcomes) = match (&synth, &data) {
                (_, Some(dir)) => (
                    io::read_firms(&dir.join(io::FIRMS_FILE))?,
                    io::read_mergers(&dir.join(io::MERGERS_FILE))?,
                    io::read_outcomes(&dir.join(io::OUTCOMES_FILE))?,
                ),
                (config, None) => {
                    let mut cfg: SynthConfig = match config {
                        Some(p) => io::read_toml(p)?,
                        None => SynthConfig::default(),
                    };
                    if let Some(s) = seed {
                        cfg.seed = s;
                    }
                    let generated = generate(&cfg)?;
                    write_dataset(&out, &generated)?;
                    (generated.firms, generated.mergers, generated.outcomes)
                }
            };
            let instrument = InstrumentConfig { exposure_kind: exposure, index_type: index, ..Default::default() };
            let (snapshots, panel) = assemble(&firms, &mergers, &outcomes, index)?;
            let panel = augment(&panel, &snapshots, &instrument)?;
            io::write_snapshots(&out.join(io::SNAPSHOTS_FILE), &snapshots)?;
            io::write_panel(&out.join(io::PANEL_FILE), &panel)?;
            let report = analyze(&panel, index, instrument)?;

            let mut table = named_rows("event_study", &report.event_study);
            table.extend(named_rows("size", &report.size_heterogeneity));
            table.extend(named_rows("anticipation", &report.anticipation));
            table.extend(named_rows("first_stage", &report.first_stage));
            table.extend(named_rows("iv", &report.iv));
            table.extend(exclusion_rows(&report.exclusion));
            table.extend(table_rows("compliers", "revenue", &report.compliers));
            write_table(&out.join("tables.csv"), &table)?;
            io::write_json(&out.join("report.json"), &report)?;

            let composites = size_split(&panel)?.len();
            let summary = PipelineOutput { out_dir: &out, composites, panel_rows: panel.len(), report: &report };
            ctx.emit(&summary, || format!("{composites} composites, {} panel rows\n{}", panel.len(), render(&table)))
        }
    }
}

fn write_dataset(dir: &Path, data: &crate::synth::SynthData) -> Result<()> {
    io::write_firms(&dir.join(io::FIRMS_FILE), &data.firms)?;
    io::write_mergers(&dir.join(io::MERGERS_FILE), &data.mergers)?;
    io::write_outcomes(&dir.join(io::OUTCOMES_FILE), &data.outcomes)?;
    io::write_json(&dir.join(io::TRUTH_FILE), &data.truth)
}

#[derive(Serialize)]
struct FlatSweepRow {
    draw: usize,
    market_size: f64,
    common_effect: f64,
    private_effect: f64,
    common_weight: f64,
    private_weight: f64,
    k_common: f64,
    k_private: f64,
    common_policy: f64,
    common_policy_oracle: f64,
    private_policy: f64,
    private_policy_oracle: f64,
    monopoly_common: f64,
    monopoly_common_oracle: f64,
    monopoly_private: f64,
    monopoly_private_oracle: f64,
    max_gap: f64,
    common_statics_hold: bool,
    private_statics_hold: bool,
}

impl From<&crate::theory::statics::SweepRow> for FlatSweepRow {
    fn from(r: &crate::theory::statics::SweepRow) -> Self {
        FlatSweepRow {
            draw: r.draw,
            market_size: r.params.market_size,
            common_effect: r.params.common_effect,
            private_effect: r.params.private_effect,
            common_weight: r.params.common_weight,
            private_weight: r.params.private_weight,
            k_common: r.k_common,
            k_private: r.k_private,
            common_policy: r.common_policy,
            common_policy_oracle: r.common_policy_oracle,
            private_policy: r.private_policy,
            private_policy_oracle: r.private_policy_oracle[0],
            monopoly_common: r.monopoly_common,
            monopoly_common_oracle: r.monopoly_common_oracle,
            monopoly_private: r.monopoly_private,
            monopoly_private_oracle: r.monopoly_private_oracle,
            max_gap: r.max_gap,
            common_statics_hold: r.common_statics_hold,
            private_statics_hold: r.private_statics_hold,
        }
    }
}

fn error_report(e: &Error) -> serde_json::Value {
    json!({
        "error": e.kind(),
        "message": e.to_string(),
        "path": e.path().map(|p| p.display().to_string()),
    })
}

/// Runs one command; returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut ctx = Ctx { json: cli.json, out };
    match dispatch(cli, &mut ctx) {
        Ok(()) => 0,
        Err(e) => {
            log::debug!("{e:?}");
            let _ = writeln!(err, "{}", error_report(&e));
            1
        }
    }
}

/// Entry point for the binary: logging from `MERGELOBBY_LOG`, then [`run_with`].
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).try_init();
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
