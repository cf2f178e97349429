//! The `ceda` command line.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ceda_core::mfs::{enumerate_ce, run_protocol_frame, EnumConfig};
use ceda_core::odds::{best_triplet_per_locality, locality_odds, majority_rule_eval};
use ceda_core::partition::deassoc_ce;
use ceda_core::shadow::shadow_analysis;
use ceda_core::simgen::{generate, Example, SimSpec};
use ceda_core::{mce_matrix, CodedColumn, CodedFrame, Dataset, FeatureKind, FeatureValues, ProtocolConfig};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{self, FileConfig};
use crate::error::{CliError, Result};
use crate::export;
use crate::ingest::{self, IngestOptions};

pub const THREADS_ENV: &str = "CEDA_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "ceda",
    version,
    about = "Conditional-entropy analysis and major factor selection for tabular data"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset as CSV.
    Simulate(SimulateArgs),
    /// Read a CSV and summarize the inferred column kinds.
    IngestCheck(IngestCheckArgs),
    /// Export bin edges and counts of every analysed column.
    Bin(AnalysisArgs),
    /// Mutual conditional entropy matrix with its clustering order.
    Mce(MceArgs),
    /// Ranked CE table of one k-feature setting.
    Ce(CeArgs),
    /// Shadow the response by a feature-set and redo the CE tables.
    Shadow(ShadowArgs),
    /// Per-locality and weighted CE tables after de-associating.
    Deassoc(DeassocArgs),
    /// Run the selection protocol and write the report.
    Select(SelectArgs),
    /// Odds across localities, best triplets and majority rule.
    Odds(OddsArgs),
    /// Run the selection protocol and write the full report bundle.
    Report(SelectArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// 1, 2, xor or custom.
    #[arg(long)]
    pub example: String,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.25)]
    pub sigma_eps: f64,
    /// Coefficients of X1..X11 for the custom example.
    #[arg(long, value_delimiter = ',')]
    pub coef: Vec<f64>,
    /// Output file or directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column(s); several are fused into one response.
    #[arg(long, value_delimiter = ',', required = true)]
    pub response: Vec<String>,
    /// Covariates to analyse (default: every non-response column).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Kind override file (`column = continuous | categorical`).
    #[arg(long)]
    pub kinds: Option<PathBuf>,
    /// Drop rows with any missing value at ingestion.
    #[arg(long)]
    pub drop_missing: bool,
    /// Merge categories: `COLUMN:FROM=TO,FROM=TO` (repeatable).
    #[arg(long)]
    pub recode: Vec<String>,
}

/// Flag twins of every configuration key.
#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// Configuration file in `key = value` form.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// equal_frequency (default) or equal_width.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Bins per continuous covariate (12).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Bins for a continuous response (12).
    #[arg(long)]
    pub response_bins: Option<usize>,
    /// Largest feature-set size enumerated (3).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Permutation replicates per noise baseline (50, at least 20).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Baseline sd multiplier for confirmability (3).
    #[arg(long)]
    pub z: Option<f64>,
    /// Smallest locality analysed after de-associating (500).
    #[arg(long)]
    pub min_cell: Option<usize>,
    /// Minimum excess CE-drop, in nats, for a conditional gain (0.007).
    #[arg(long)]
    pub min_gain: Option<f64>,
    /// Largest number of shortlisted candidates (10).
    #[arg(long)]
    pub shortlist_cap: Option<usize>,
    /// Largest number of selection stages (3).
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Minimum rows per occupied hypercube (10).
    #[arg(long)]
    pub reliability: Option<f64>,
    /// Sets extended per level once the budget is exceeded (50).
    #[arg(long)]
    pub beam_width: Option<usize>,
    /// Largest subset count enumerated exhaustively (100000).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-feature bin counts: `NAME=BINS` (repeatable).
    #[arg(long)]
    pub bins_for: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<FileConfig> {
        let mut f = config::load(self.config.as_deref())?;
        f.flag("scheme", self.scheme.clone())?;
        f.flag("bins", self.bins.map(|v| v.to_string()))?;
        f.flag("response_bins", self.response_bins.map(|v| v.to_string()))?;
        f.flag("k_max", self.k_max.map(|v| v.to_string()))?;
        f.flag("replicates", self.replicates.map(|v| v.to_string()))?;
        f.flag("z", self.z.map(|v| v.to_string()))?;
        f.flag("min_cell", self.min_cell.map(|v| v.to_string()))?;
        f.flag("min_gain", self.min_gain.map(|v| v.to_string()))?;
        f.flag("shortlist_cap", self.shortlist_cap.map(|v| v.to_string()))?;
        f.flag("max_depth", self.max_depth.map(|v| v.to_string()))?;
        f.flag("reliability", self.reliability.map(|v| v.to_string()))?;
        f.flag("beam_width", self.beam_width.map(|v| v.to_string()))?;
        f.flag("budget", self.budget.map(|v| v.to_string()))?;
        f.flag("seed", self.seed.map(|v| v.to_string()))?;
        Ok(f)
    }

    fn require_seed(f: &FileConfig) -> Result<()> {
        if f.has("seed") {
            Ok(())
        } else {
            Err(CliError::Config(
                "a seed is required: pass --seed or set `seed` in the config file".into(),
            ))
        }
    }

    fn per_feature(&self) -> Result<BTreeMap<String, usize>> {
        self.bins_for
            .iter()
            .map(|s| {
                let (k, v) = s
                    .split_once('=')
                    .ok_or_else(|| CliError::Config(format!("--bins-for expects NAME=BINS, got `{s}`")))?;
                let bins = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("--bins-for: bad bin count `{v}`")))?;
                Ok((k.trim().to_string(), bins))
            })
            .collect()
    }
}

#[derive(Args, Debug)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output file or directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct IngestCheckArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub response: Vec<String>,
    #[arg(long)]
    pub kinds: Option<PathBuf>,
    #[arg(long)]
    pub drop_missing: bool,
    /// JSON summary destination (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MceArgs {
    #[command(flatten)]
    pub a: AnalysisArgs,
    /// Also write an SVG heatmap here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CeArgs {
    #[command(flatten)]
    pub a: AnalysisArgs,
    /// Feature-set size.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct ShadowArgs {
    #[command(flatten)]
    pub a: AnalysisArgs,
    /// Feature-set the response is shadowed by.
    #[arg(long, value_delimiter = ',', required = true)]
    pub by: Vec<String>,
    /// Largest k of the CE tables (default: k_max).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DeassocArgs {
    #[command(flatten)]
    pub a: AnalysisArgs,
    /// Conditioning feature-set.
    #[arg(long, value_delimiter = ',', required = true)]
    pub by: Vec<String>,
    /// Largest k of the per-locality tables (default: k_max).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub a: AnalysisArgs,
}

#[derive(Args, Debug)]
pub struct OddsArgs {
    #[command(flatten)]
    pub a: AnalysisArgs,
    /// Locality feature-set.
    #[arg(long, value_delimiter = ',')]
    pub locality: Vec<String>,
    /// Expansion feature-set within each locality.
    #[arg(long, value_delimiter = ',')]
    pub expand: Vec<String>,
    /// Binary candidates for the per-locality triplet search.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Vec<String>,
    #[arg(long, default_value_t = 500)]
    pub min_n: usize,
}

fn parse_recode(spec: &str) -> Result<(String, BTreeMap<String, String>)> {
    let (col, pairs) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("--recode expects COLUMN:FROM=TO,..., got `{spec}`")))?;
    let map = pairs
        .split(',')
        .map(|p| {
            let (a, b) = p
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--recode: bad pair `{p}`")))?;
            Ok((a.trim().to_string(), b.trim().to_string()))
        })
        .collect::<Result<_>>()?;
    Ok((col.trim().to_string(), map))
}

fn load_dataset(d: &DataArgs) -> Result<Dataset> {
    let kinds = match &d.kinds {
        Some(p) => ingest::read_kinds(p)?,
        None => BTreeMap::new(),
    };
    let responses: Vec<&str> = d.response.iter().map(String::as_str).collect();
    let mut ds = ingest::ingest_csv(
        &d.data,
        &responses,
        &IngestOptions {
            kinds,
            drop_missing: d.drop_missing,
        },
    )?;
    for r in &d.recode {
        let (col, map) = parse_recode(r)?;
        ds = ds.recode(&col, &map)?;
    }
    Ok(ds)
}

fn load_frame(d: &DataArgs, cfg: &ProtocolConfig, per_feature: BTreeMap<String, usize>) -> Result<CodedFrame> {
    let ds = load_dataset(d)?;
    let responses: Vec<&str> = d.response.iter().map(String::as_str).collect();
    let covs: Vec<&str> = if d.covariates.is_empty() {
        ds.names().filter(|n| !responses.contains(n)).collect()
    } else {
        d.covariates.iter().map(String::as_str).collect()
    };
    let mut binning = cfg.binning();
    binning.per_feature = per_feature;
    let frame = CodedFrame::from_dataset(&ds, &responses, &covs, &binning)?;
    if frame.dropped_rows > 0 {
        log::warn!(
            "{} rows with missing values excluded from this analysis",
            frame.dropped_rows
        );
    }
    Ok(frame)
}

fn analysis(a: &AnalysisArgs, needs_seed: bool) -> Result<(ProtocolConfig, CodedFrame)> {
    let f = a.cfg.resolve()?;
    if needs_seed {
        ConfigArgs::require_seed(&f)?;
    }
    let frame = load_frame(&a.data, &f.config, a.cfg.per_feature()?)?;
    Ok((f.config, frame))
}

fn simulate(s: &SimulateArgs) -> Result<()> {
    let example = match s.example.as_str() {
        "1" | "one" => Example::One,
        "2" | "two" => Example::Two,
        "xor" => Example::Xor,
        "custom" => Example::Custom(s.coef.clone()),
        other => {
            return Err(CliError::Config(format!(
                "unknown example `{other}` (1, 2, xor, custom)"
            )))
        }
    };
    let spec = SimSpec {
        n: s.n,
        seed: s.seed,
        rho: s.rho,
        sigma_eps: s.sigma_eps,
        example,
    };
    let ds = generate(&spec)?;
    let out = export::create(&s.out)?;
    ingest::write_csv(&ds, out)
}

#[derive(Serialize)]
struct ColumnSummary {
    name: String,
    kind: FeatureKind,
    response: bool,
    missing: usize,
    distinct: usize,
}

#[derive(Serialize)]
struct IngestSummary {
    n_rows: usize,
    complete_rows: usize,
    columns: Vec<ColumnSummary>,
}

fn ingest_check(a: &IngestCheckArgs) -> Result<()> {
    let kinds = match &a.kinds {
        Some(p) => ingest::read_kinds(p)?,
        None => BTreeMap::new(),
    };
    let responses: Vec<&str> = a.response.iter().map(String::as_str).collect();
    let ds = ingest::ingest_csv(
        &a.data,
        &responses,
        &IngestOptions {
            kinds,
            drop_missing: a.drop_missing,
        },
    )?;
    let names: Vec<&str> = ds.names().collect();
    let columns = ds
        .columns()
        .iter()
        .map(|c| {
            let missing = (0..ds.n_rows()).filter(|&i| c.values.is_missing(i)).count();
            let distinct = match &c.values {
                FeatureValues::Continuous(v) => {
                    let mut s: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
                    s.sort_by(f64::total_cmp);
                    s.dedup();
                    s.len()
                }
                FeatureValues::Categorical(v) => v.iter().flatten().collect::<std::collections::BTreeSet<_>>().len(),
            };
            ColumnSummary {
                name: c.name.clone(),
                kind: c.kind(),
                response: c.is_response,
                missing,
                distinct,
            }
        })
        .collect();
    let summary = IngestSummary {
        n_rows: ds.n_rows(),
        complete_rows: ds.complete_rows(&names)?.len(),
        columns,
    };
    match &a.out {
        Some(p) => export::write_json(&summary, p),
        None => {
            use std::io::Write;
            let text = serde_json::to_string_pretty(&summary)?;
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn all_columns(frame: &CodedFrame) -> Vec<&CodedColumn> {
    let mut cols = vec![&frame.response];
    cols.extend(frame.covariates.iter());
    cols
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn shadow_cmd(s: &ShadowArgs) -> Result<()> {
    let (cfg, frame) = analysis(&s.a, true)?;
    let k = s.k.unwrap_or(cfg.k_max);
    let res = shadow_analysis(&frame, &strs(&s.by), k, &cfg.enumeration(), cfg.seed)?;
    let dir = &s.a.out;
    export::create_dir(dir)?;
    for t in &res.tables {
        export::write_ce_table(t, &dir.join(format!("ce_k{}.csv", t.k)))?;
    }
    // the coded analysis columns plus the shadowed response
    let mut w = csv::Writer::from_writer(export::create(&dir.join("shadowed.csv"))?);
    let cols = all_columns(&frame);
    let mut header: Vec<&str> = cols.iter().map(|c| c.name.as_str()).collect();
    header.push(&res.shadowed.name);
    w.write_record(&header)?;
    for i in 0..frame.n_rows() {
        let mut rec: Vec<&str> = cols.iter().map(|c| c.label(c.codes()[i])).collect();
        rec.push(res.shadowed.label(res.shadowed.codes()[i]));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(dir, e))?;
    export::write_json(&res, &dir.join("shadow.json"))
}

fn odds_cmd(o: &OddsArgs) -> Result<()> {
    let f = o.a.cfg.resolve()?;
    let mut data = DataArgs {
        covariates: Vec::new(),
        ..clone_data(&o.a.data)
    };
    let mut wanted: Vec<String> = o
        .locality
        .iter()
        .chain(&o.expand)
        .chain(&o.candidates)
        .cloned()
        .collect();
    wanted.sort();
    wanted.dedup();
    data.covariates = wanted;
    let frame = load_frame(&data, &f.config, o.a.cfg.per_feature()?)?;
    let pick = |names: &[String]| -> Result<Vec<&CodedColumn>> {
        names
            .iter()
            .map(|n| frame.covariate_index(n).map(|i| &frame.covariates[i]))
            .collect::<std::result::Result<_, _>>()
            .map_err(Into::into)
    };
    let loc = pick(&o.locality)?;
    let exp = pick(&o.expand)?;
    let dir = &o.a.out;
    export::create_dir(dir)?;
    let rows = locality_odds(&frame.response, &loc, &exp)?;
    export::write_odds(&rows, &dir.join("odds.csv"))?;
    export::write_text(&crate::svg::odds_dot_plot(&rows), &dir.join("odds.svg"))?;
    export::write_majority(&majority_rule_eval(&frame.response, &loc)?, &dir.join("majority.json"))?;
    if !o.candidates.is_empty() {
        let cands = pick(&o.candidates)?;
        let trip = best_triplet_per_locality(&frame.response, &loc, &cands, o.min_n)?;
        export::write_triplets(&trip, &dir.join("triplets.csv"))?;
    }
    Ok(())
}

fn clone_data(d: &DataArgs) -> DataArgs {
    DataArgs {
        data: d.data.clone(),
        response: d.response.clone(),
        covariates: d.covariates.clone(),
        kinds: d.kinds.clone(),
        drop_missing: d.drop_missing,
        recode: d.recode.clone(),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(s) => simulate(s),
        Command::IngestCheck(a) => ingest_check(a),
        Command::Bin(a) => {
            let (_, frame) = analysis(a, false)?;
            export::write_bins(&all_columns(&frame), &a.out)
        }
        Command::Mce(m) => {
            let (_, frame) = analysis(&m.a, false)?;
            let matrix = mce_matrix(&all_columns(&frame))?;
            export::write_mce(&matrix, &m.a.out)?;
            if let Some(p) = &m.svg {
                export::write_text(&crate::svg::heatmap(&matrix), p)?;
            }
            Ok(())
        }
        Command::Ce(c) => {
            let (cfg, frame) = analysis(&c.a, false)?;
            let all: Vec<usize> = (0..frame.covariates.len()).collect();
            let t = enumerate_ce(&frame, &all, c.k, &cfg.enumeration())?;
            export::write_ce_table(&t, &c.a.out)
        }
        Command::Shadow(s) => shadow_cmd(s),
        Command::Deassoc(d) => {
            let (cfg, frame) = analysis(&d.a, false)?;
            let ecfg: EnumConfig = cfg.enumeration();
            let t = deassoc_ce(&frame, &strs(&d.by), d.k.unwrap_or(cfg.k_max), cfg.min_cell, &ecfg)?;
            export::write_deassoc(&t, &d.a.out).map(|_| ())
        }
        Command::Select(s) | Command::Report(s) => {
            let (cfg, frame) = analysis(&s.a, true)?;
            let report = run_protocol_frame(&frame, &cfg)?;
            let full = matches!(cli.command, Command::Report(_));
            export::write_report(&report, &frame, &cfg, &s.a.out, full)
        }
        Command::Odds(o) => odds_cmd(o),
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: ErrorBody<'a>,
}

pub fn error_json(kind: &str, message: String) -> String {
    serde_json::to_string(&ErrorJson {
        error: ErrorBody { kind, message },
    })
    .unwrap_or_default()
}

/// Parse arguments, run, and return the process exit code. Failures are
/// reported on standard error as one JSON object.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim().to_string()));
            return 2;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", error_json("config", e.to_string()));
            return 2;
        }
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), e.to_string()));
            1
        }
    }
}
