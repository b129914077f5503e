//! Command-line front end: single sessions, interception sweeps, exact attack
//! reports and the reproduced attack tables, as JSON or CSV documents.
//!
//! Exit codes: [`EXIT_OK`] on success, [`EXIT_ABORT`] when a session aborts at
//! the check step, [`EXIT_USAGE`] for bad flags or invalid combinations and
//! [`EXIT_FAILURE`] for I/O errors.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use dfs_qkd_core::oracle::{mc_error_rates_with_noise, reproduce_table};
use dfs_qkd_core::protocol::{CheckTally, TranscriptEntry, DEFAULT_ABORT_THRESHOLD};
use dfs_qkd_core::{
    analyze, run_session, Attack, AttackKind, CnotPair, NoisePolicy, QkdError, SessionConfig,
    Variant,
};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DFS_QKD_OUT_DIR";

/// Interception probabilities visited by `sweep`.
pub const SWEEP_P: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Parser)]
#[command(
    name = "dfs-qkd",
    version,
    about = "Simulate DFS quantum key distribution sessions and attacks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the document here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Directory for output files when --output is not given.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one session end to end.
    Run(RunArgs),
    /// Monte Carlo error rates against interception probability.
    Sweep(SweepArgs),
    /// Reproduce the attack tables with the exact oracle.
    Tables(TablesArgs),
    /// Exact error rates and eavesdropper accuracy for one attack.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// none, mrp-x, mrp-z, mre-x, mre-z, bell, cnot-x or cnot-z.
    #[arg(long, value_parser = parse_attack, default_value = "none")]
    pub attack: AttackKind,

    /// Probability that Eve intercepts a quartet.
    #[arg(long = "p", default_value_t = 1.0)]
    pub intercept_probability: f64,

    /// Photons whose parity the CNOT attack extracts.
    #[arg(long, value_enum, default_value_t = PairArg::P34)]
    pub cnot_pair: PairArg,
}

impl AttackArgs {
    fn attack(&self) -> Attack {
        Attack::new(self.attack)
            .with_probability(self.intercept_probability)
            .with_cnot_pair(self.cnot_pair.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairArg {
    #[value(name = "34")]
    P34,
    #[value(name = "24")]
    P24,
}

impl From<PairArg> for CnotPair {
    fn from(p: PairArg) -> Self {
        match p {
            PairArg::P34 => CnotPair::Photons34,
            PairArg::P24 => CnotPair::Photons24,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Variant,
    #[command(flatten)]
    pub attack: AttackArgs,
    /// Key quartets.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Check quartets per check basis.
    #[arg(long, default_value_t = 16)]
    pub delta: usize,
    /// Abort when the average check error exceeds this.
    #[arg(long, default_value_t = DEFAULT_ABORT_THRESHOLD)]
    pub threshold: f64,
    /// none, random, fixed:VALUE or uniform:LO:HI (radians).
    #[arg(long, default_value = "none")]
    pub noise: NoiseArg,
    /// Fraction of the channel noise applied before Eve.
    #[arg(long, default_value_t = 1.0)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Variant,
    /// none, mrp-x, mrp-z, mre-x, mre-z, bell, cnot-x or cnot-z.
    #[arg(long, value_parser = parse_attack)]
    pub attack: AttackKind,
    #[arg(long, value_enum, default_value_t = PairArg::P34)]
    pub cnot_pair: PairArg,
    /// Check quartets per basis at each probability.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value = "none")]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Restrict to one variant; both by default.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Variant,
    #[command(flatten)]
    pub attack: AttackArgs,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: QkdError| e.to_string())
}

fn parse_attack(s: &str) -> Result<AttackKind, String> {
    s.parse().map_err(|e: QkdError| e.to_string())
}

/// Noise policy as written on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseArg(pub NoisePolicy);

impl FromStr for NoiseArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| format!("bad number {t:?}: {e}"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let policy = match parts.as_slice() {
            ["none"] => NoisePolicy::default(),
            ["random"] => NoisePolicy::UniformPerQuartet {
                lo: 0.0,
                hi: std::f64::consts::TAU,
            },
            ["fixed", v] => NoisePolicy::Fixed { value: num(v)? },
            ["uniform", lo, hi] => NoisePolicy::UniformPerQuartet {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            _ => {
                return Err(format!(
                    "expected none, random, fixed:V or uniform:LO:HI, got {s:?}"
                ))
            }
        };
        policy.validate().map_err(|e| e.to_string())?;
        Ok(NoiseArg(policy))
    }
}

impl fmt::Display for NoiseArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            NoisePolicy::Fixed { value } => write!(f, "fixed:{value}"),
            NoisePolicy::UniformPerQuartet { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

/// Rounds a fraction to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn sig6_opt(x: Option<f64>) -> Option<f64> {
    x.map(sig6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub e_x: f64,
    pub e_z: f64,
    pub e_a: f64,
}

impl Rates {
    fn rounded(e_x: f64, e_z: f64, e_a: f64) -> Self {
        Rates {
            e_x: sig6(e_x),
            e_z: sig6(e_z),
            e_a: sig6(e_a),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfigEcho {
    pub variant: Variant,
    pub attack: AttackKind,
    pub intercept_probability: f64,
    pub cnot_pair: CnotPair,
    pub n: usize,
    pub delta: usize,
    pub noise_policy: NoisePolicy,
    pub noise_split: f64,
    pub abort_threshold: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EveReport {
    pub intercepted: usize,
    pub evaluated: usize,
    pub pre_announcement_correct: usize,
    pub pre_accuracy: Option<f64>,
    pub post_announcement_correct: Option<usize>,
    pub post_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionReport {
    pub config: RunConfigEcho,
    pub status: &'static str,
    pub aborted: bool,
    pub rates: Rates,
    pub x_check: CheckTally,
    pub z_check: CheckTally,
    pub alice_key_bits: usize,
    pub bob_key_bits: usize,
    pub keys_agree: bool,
    pub inconsistent_count: usize,
    pub sifted_fraction: f64,
    pub alice_key: String,
    pub bob_key: String,
    pub eve: Option<EveReport>,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Debug, Serialize)]
struct SessionCsvRow<'a> {
    variant: Variant,
    attack: AttackKind,
    intercept_probability: f64,
    cnot_pair: CnotPair,
    n: usize,
    delta: usize,
    noise: &'a str,
    noise_split: f64,
    abort_threshold: f64,
    seed: u64,
    status: &'static str,
    e_x: f64,
    e_z: f64,
    e_a: f64,
    x_quartets: usize,
    x_failed_pairs: usize,
    z_quartets: usize,
    z_failed_pairs: usize,
    alice_key_bits: usize,
    bob_key_bits: usize,
    keys_agree: bool,
    inconsistent_count: usize,
    sifted_fraction: f64,
    eve_intercepted: Option<usize>,
    eve_pre_accuracy: Option<f64>,
    eve_post_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRecord {
    pub variant: Variant,
    pub attack: AttackKind,
    pub e_x: f64,
    pub e_z: f64,
    pub e_a_computed: f64,
    pub e_a_paper: f64,
    pub match_flag: bool,
}

#[derive(Debug, Serialize)]
pub struct TablesDocument {
    pub rows: Vec<TableRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    pub e_x: f64,
    pub se_x: f64,
    pub e_z: f64,
    pub se_z: f64,
    pub e_a: f64,
    pub se_a: f64,
    pub trials: usize,
    pub eve_pre_accuracy: Option<f64>,
    pub eve_post_accuracy: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepConfigEcho {
    pub variant: Variant,
    pub attack: AttackKind,
    pub cnot_pair: CnotPair,
    pub trials: usize,
    pub noise_policy: NoisePolicy,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct SweepDocument {
    pub config: SweepConfigEcho,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Serialize)]
struct SweepCsvRow {
    variant: Variant,
    attack: AttackKind,
    seed: u64,
    p: f64,
    e_x: f64,
    se_x: f64,
    e_z: f64,
    se_z: f64,
    e_a: f64,
    se_a: f64,
    trials: usize,
    eve_pre_accuracy: Option<f64>,
    eve_post_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDocument {
    pub variant: Variant,
    pub attack: AttackKind,
    pub intercept_probability: f64,
    pub cnot_pair: CnotPair,
    pub e_x: f64,
    pub e_z: f64,
    pub e_a: f64,
    pub eve_pre_accuracy: Option<f64>,
    pub eve_post_accuracy: Option<f64>,
    pub branch_count: usize,
    pub probability_mass: f64,
}

/// A finished command: the rendered document, its default file name and the
/// exit code to report once it is written.
#[derive(Debug)]
pub struct Rendered {
    pub body: String,
    pub file_stem: String,
    pub exit_code: i32,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Failure(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<QkdError> for CliError {
    fn from(e: QkdError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failure(e)
    }
}

fn json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).context("serialising JSON")?;
    s.push('\n');
    Ok(s)
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).context("serialising CSV")?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| anyhow::anyhow!("flushing CSV: {e}"))?;
    Ok(String::from_utf8(bytes).context("CSV is not UTF-8")?)
}

pub fn session_report(args: &RunArgs) -> Result<SessionReport, CliError> {
    let cfg = SessionConfig::new(args.variant, args.n, args.delta, args.seed)
        .with_noise(args.noise.0)
        .with_threshold(args.threshold)
        .with_split(args.split);
    let attack = args.attack.attack();
    let res = run_session(&cfg, &attack)?;
    Ok(SessionReport {
        config: RunConfigEcho {
            variant: cfg.variant,
            attack: attack.kind,
            intercept_probability: attack.intercept_probability,
            cnot_pair: attack.cnot_pair,
            n: cfg.n,
            delta: cfg.delta,
            noise_policy: cfg.noise_policy,
            noise_split: cfg.noise_split,
            abort_threshold: cfg.abort_threshold,
            seed: cfg.seed,
        },
        status: if res.aborted { "aborted" } else { "completed" },
        aborted: res.aborted,
        rates: Rates::rounded(res.observed_e_x, res.observed_e_z, res.observed_e_a),
        x_check: res.x_check,
        z_check: res.z_check,
        alice_key_bits: res.alice_raw_key.len(),
        bob_key_bits: res.bob_raw_key.len(),
        keys_agree: res.keys_agree(),
        inconsistent_count: res.inconsistent_count,
        sifted_fraction: sig6(res.sifted_fraction()),
        alice_key: res.alice_raw_key.to_string(),
        bob_key: res.bob_raw_key.to_string(),
        eve: res.eve_stats.map(|e| EveReport {
            intercepted: e.intercepted,
            evaluated: e.evaluated,
            pre_announcement_correct: e.pre_announcement_correct,
            pre_accuracy: sig6_opt(e.pre_accuracy),
            post_announcement_correct: e.post_announcement_correct,
            post_accuracy: sig6_opt(e.post_accuracy),
        }),
        transcript: res.transcript,
    })
}

fn cmd_run(args: &RunArgs, format: Format) -> Result<Rendered, CliError> {
    let report = session_report(args)?;
    let body = match format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let noise = args.noise.to_string();
            let c = &report.config;
            csv_rows([SessionCsvRow {
                variant: c.variant,
                attack: c.attack,
                intercept_probability: c.intercept_probability,
                cnot_pair: c.cnot_pair,
                n: c.n,
                delta: c.delta,
                noise: &noise,
                noise_split: c.noise_split,
                abort_threshold: c.abort_threshold,
                seed: c.seed,
                status: report.status,
                e_x: report.rates.e_x,
                e_z: report.rates.e_z,
                e_a: report.rates.e_a,
                x_quartets: report.x_check.quartets,
                x_failed_pairs: report.x_check.failed_pairs(),
                z_quartets: report.z_check.quartets,
                z_failed_pairs: report.z_check.failed_pairs(),
                alice_key_bits: report.alice_key_bits,
                bob_key_bits: report.bob_key_bits,
                keys_agree: report.keys_agree,
                inconsistent_count: report.inconsistent_count,
                sifted_fraction: report.sifted_fraction,
                eve_intercepted: report.eve.as_ref().map(|e| e.intercepted),
                eve_pre_accuracy: report.eve.as_ref().and_then(|e| e.pre_accuracy),
                eve_post_accuracy: report.eve.as_ref().and_then(|e| e.post_accuracy),
            }])?
        }
    };
    Ok(Rendered {
        body,
        file_stem: format!("run-{}-{}-s{}", args.variant, args.attack.attack, args.seed),
        exit_code: if report.aborted { EXIT_ABORT } else { EXIT_OK },
    })
}

pub fn tables_document(variant: Option<Variant>) -> Result<TablesDocument, CliError> {
    let variants = match variant {
        Some(v) => vec![v],
        None => Variant::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    for v in variants {
        rows.extend(reproduce_table(v)?.into_iter().map(|r| TableRecord {
            variant: r.variant,
            attack: r.attack,
            e_x: sig6(r.e_x),
            e_z: sig6(r.e_z),
            e_a_computed: sig6(r.e_a_computed),
            e_a_paper: sig6(r.e_a_paper),
            match_flag: r.match_flag,
        }));
    }
    Ok(TablesDocument { rows })
}

fn cmd_tables(args: &TablesArgs, format: Format) -> Result<Rendered, CliError> {
    let doc = tables_document(args.variant)?;
    let body = match format {
        Format::Json => json(&doc)?,
        Format::Csv => csv_rows(doc.rows)?,
    };
    let file_stem = match args.variant {
        Some(v) => format!("tables-{v}"),
        None => "tables".to_owned(),
    };
    Ok(Rendered {
        body,
        file_stem,
        exit_code: EXIT_OK,
    })
}

pub fn sweep_document(args: &SweepArgs) -> Result<SweepDocument, CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let base = Attack::new(args.attack).with_cnot_pair(args.cnot_pair.into());
    let mut points = Vec::with_capacity(SWEEP_P.len());
    for p in SWEEP_P {
        let mc = mc_error_rates_with_noise(
            args.variant,
            &base.with_probability(p),
            args.trials,
            args.seed,
            args.noise.0,
        )?;
        points.push(SweepPoint {
            p,
            e_x: sig6(mc.rates.e_x),
            se_x: sig6(mc.se_x),
            e_z: sig6(mc.rates.e_z),
            se_z: sig6(mc.se_z),
            e_a: sig6(mc.rates.e_a),
            se_a: sig6(mc.se_a),
            trials: mc.trials,
            eve_pre_accuracy: sig6_opt(mc.eve_pre_accuracy),
            eve_post_accuracy: sig6_opt(mc.eve_post_accuracy),
        });
    }
    Ok(SweepDocument {
        config: SweepConfigEcho {
            variant: args.variant,
            attack: args.attack,
            cnot_pair: args.cnot_pair.into(),
            trials: args.trials,
            noise_policy: args.noise.0,
            seed: args.seed,
        },
        points,
    })
}

fn cmd_sweep(args: &SweepArgs, format: Format) -> Result<Rendered, CliError> {
    let doc = sweep_document(args)?;
    let body = match format {
        Format::Json => json(&doc)?,
        Format::Csv => csv_rows(doc.points.into_iter().map(|pt| SweepCsvRow {
            variant: args.variant,
            attack: args.attack,
            seed: args.seed,
            p: pt.p,
            e_x: pt.e_x,
            se_x: pt.se_x,
            e_z: pt.e_z,
            se_z: pt.se_z,
            e_a: pt.e_a,
            se_a: pt.se_a,
            trials: pt.trials,
            eve_pre_accuracy: pt.eve_pre_accuracy,
            eve_post_accuracy: pt.eve_post_accuracy,
        }))?,
    };
    Ok(Rendered {
        body,
        file_stem: format!("sweep-{}-{}-s{}", args.variant, args.attack, args.seed),
        exit_code: EXIT_OK,
    })
}

pub fn oracle_document(args: &OracleArgs) -> Result<OracleDocument, CliError> {
    let attack = args.attack.attack();
    let r = analyze(args.variant, &attack)?;
    Ok(OracleDocument {
        variant: r.variant,
        attack: r.attack,
        intercept_probability: r.intercept_probability,
        cnot_pair: attack.cnot_pair,
        e_x: sig6(r.rates.e_x),
        e_z: sig6(r.rates.e_z),
        e_a: sig6(r.rates.e_a),
        eve_pre_accuracy: sig6_opt(r.eve_pre_accuracy),
        eve_post_accuracy: sig6_opt(r.eve_post_accuracy),
        branch_count: r.branch_count,
        probability_mass: sig6(r.probability_mass),
    })
}

fn cmd_oracle(args: &OracleArgs, format: Format) -> Result<Rendered, CliError> {
    let doc = oracle_document(args)?;
    let body = match format {
        Format::Json => json(&doc)?,
        Format::Csv => csv_rows([doc])?,
    };
    Ok(Rendered {
        body,
        file_stem: format!("oracle-{}-{}", args.variant, args.attack.attack),
        exit_code: EXIT_OK,
    })
}

pub fn render(cli: &Cli) -> Result<Rendered, CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, cli.format),
        Command::Sweep(a) => cmd_sweep(a, cli.format),
        Command::Tables(a) => cmd_tables(a, cli.format),
        Command::Oracle(a) => cmd_oracle(a, cli.format),
    }
}

fn write_file(path: &Path, body: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Renders the command and writes it to --output, the default output
/// directory, or stdout. Returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let rendered = render(cli)?;
    let target = match (&cli.output, &cli.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            Some(dir.join(format!("{}.{}", rendered.file_stem, cli.format.extension())))
        }
        (None, None) => None,
    };
    match target {
        Some(path) => write_file(&path, &rendered.body)?,
        None => print!("{}", rendered.body),
    }
    Ok(rendered.exit_code)
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.1875), 0.1875);
        assert_eq!(sig6(1.0 / 3.0), 0.333333);
        assert_eq!(sig6(2.0 / 3.0), 0.666667);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(sig6(1234567.0), 1234570.0);
    }

    #[test]
    fn noise_flags() {
        assert_eq!(
            "none".parse::<NoiseArg>().unwrap().0,
            NoisePolicy::Fixed { value: 0.0 }
        );
        assert_eq!(
            "uniform:0:1.5".parse::<NoiseArg>().unwrap().0,
            NoisePolicy::UniformPerQuartet { lo: 0.0, hi: 1.5 }
        );
        assert_eq!(
            "fixed:0.3".parse::<NoiseArg>().unwrap().to_string(),
            "fixed:0.3"
        );
        assert!("uniform:2:1".parse::<NoiseArg>().is_err());
        assert!("gauss:1".parse::<NoiseArg>().is_err());
    }

    #[test]
    fn table_document_flags_one_row() {
        let doc = tables_document(None).unwrap();
        assert_eq!(doc.rows.len(), 10);
        let bad: Vec<_> = doc.rows.iter().filter(|r| !r.match_flag).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].variant, Variant::Dephasing);
        assert_eq!(bad[0].attack, AttackKind::BellResend);
        assert_eq!(bad[0].e_a_computed, 0.1875);
        assert_eq!(bad[0].e_a_paper, 0.1925);
    }

    #[test]
    fn oracle_rejects_unsupported_rows() {
        let cli = Cli::try_parse_from([
            "dfs-qkd",
            "oracle",
            "--variant",
            "dephasing",
            "--attack",
            "mrp-z",
        ])
        .unwrap();
        assert_eq!(execute(&cli).unwrap_err().exit_code(), EXIT_USAGE);
    }
}
