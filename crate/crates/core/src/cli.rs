//! Command-line front end: `transform`, `kernel`, `verify` and `explore`.
//!
//! Options may also come from a TOML file given with `--config`; flags on
//! the command line win over the file, and `VILENKIN_LAB_OUT` wins over
//! both for the output location.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::builder::PossibleValue;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::{parse_radix_list, GroupSpec};
use crate::io::{read_function, read_spectrum, write_values};
use crate::kernels::{
    dirichlet_kernel, fejer_kernel, fejer_kernel_closed, norlund_kernel_spectral,
    tail_kernel_spectral,
};
use crate::spectral::{forward_transform, inverse_transform, naive_transform};
use crate::summability::{WeightKind, WeightSequence};
use crate::verify::{
    emit_report, run_suite, ReportFormat, SeedSet, Suite, SuiteConfig, TolerancePolicy,
    VerificationReport,
};

pub const OUT_ENV: &str = "VILENKIN_LAB_OUT";

const DEFAULT_LEVEL: usize = 6;

impl ValueEnum for Suite {
    fn value_variants<'a>() -> &'a [Self] {
        &Suite::ALL
    }

    fn to_possible_value(&self) -> Option<PossibleValue> {
        Some(PossibleValue::new(self.name()).help(self.description()))
    }
}

impl ValueEnum for ReportFormat {
    fn value_variants<'a>() -> &'a [Self] {
        &[ReportFormat::Csv, ReportFormat::Json]
    }

    fn to_possible_value(&self) -> Option<PossibleValue> {
        Some(PossibleValue::new(self.extension()))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vilenkin-lab",
    version,
    about = "Vilenkin-Fourier transforms, Nörlund kernels and numerical checks of their estimates"
)]
struct Cli {
    #[command(flatten)]
    options: Options,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct Options {
    /// TOML file with defaults for any of these options
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    config: Option<PathBuf>,

    /// Comma-separated radices, e.g. 2,3,4; a single radix is repeated up to --level
    #[arg(long, global = true, value_name = "LIST")]
    group: Option<String>,

    /// Group level N
    #[arg(long, global = true)]
    level: Option<usize>,

    /// Weight family: const, log:a=<alpha>,b=<beta> or custom:<path>
    #[arg(long, global = true, value_name = "FAMILY")]
    weights: Option<String>,

    /// Exponents, comma-separated
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,

    /// Suites to run, comma-separated
    #[arg(long, global = true, value_delimiter = ',')]
    suite: Option<Vec<Suite>>,

    /// Atom seeds as COUNT or BASE:COUNT (base decimal or 0x-hex)
    #[arg(long, global = true, value_name = "SEEDS")]
    seeds: Option<String>,

    /// Truncation points for sums and suprema over n, comma-separated
    #[arg(long, global = true, value_delimiter = ',')]
    nmax: Option<Vec<usize>>,

    /// Swept levels: N for kernel-bounds, N0 for lemma5*, N' for atom suites
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<usize>>,

    /// Output directory for reports, or output file for transform and kernel
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true)]
    format: Option<ReportFormat>,

    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Relative drift allowed between consecutive levels
    #[arg(long, global = true)]
    tolerance_drift: Option<f64>,

    /// Do not print a summary line per report
    #[arg(long, global = true)]
    quiet: bool,
}

impl Options {
    /// Fills every unset field from `file`.
    fn or(self, file: Options) -> Options {
        Options {
            config: self.config,
            group: self.group.or(file.group),
            level: self.level.or(file.level),
            weights: self.weights.or(file.weights),
            p: self.p.or(file.p),
            suite: self.suite.or(file.suite),
            seeds: self.seeds.or(file.seeds),
            nmax: self.nmax.or(file.nmax),
            levels: self.levels.or(file.levels),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            workers: self.workers.or(file.workers),
            tolerance_drift: self.tolerance_drift.or(file.tolerance_drift),
            quiet: self.quiet || file.quiet,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vilenkin-Fourier transform of a function read from CSV
    Transform {
        /// Input CSV with columns index,re,im
        #[arg(long)]
        input: PathBuf,
        /// Synthesize a function from coefficients instead
        #[arg(long)]
        inverse: bool,
        /// Use the O(M^2) direct sum instead of the fast transform
        #[arg(long)]
        naive: bool,
    },
    /// Evaluate a kernel on every cell
    Kernel {
        #[arg(long, value_enum)]
        kind: KernelChoice,
        /// Kernel index n, or j for fejer-closed
        #[arg(long)]
        n: usize,
        /// Start level of the tail kernel
        #[arg(long)]
        n0: Option<usize>,
    },
    /// Run verification suites
    Verify,
    /// Report-only growth curves of the unweighted maximal operator
    Explore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    Dirichlet,
    Fejer,
    FejerClosed,
    Norlund,
    Tail,
}

/// What `run` should do.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Transform {
        input: PathBuf,
        inverse: bool,
        naive: bool,
    },
    Kernel {
        kind: KernelChoice,
        n: usize,
        n0: Option<usize>,
    },
    Verify {
        suites: Vec<Suite>,
    },
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub group: String,
    pub level: usize,
    pub weights: String,
    pub suite_config: SuiteConfig,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub workers: usize,
    pub quiet: bool,
}

/// Why arguments were refused.
#[derive(Debug)]
pub enum CliError {
    /// Includes `--help` and `--version`, which clap reports as errors.
    Usage(clap::Error),
    Invalid(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Invalid(_) => 2,
        }
    }

    /// Prints the diagnostic, or the help text, to the right stream.
    pub fn report(&self) {
        match self {
            CliError::Usage(e) => {
                let _ = e.print();
            }
            CliError::Invalid(e) => eprintln!("error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Invalid(e)
    }
}

/// Parses `argv` (program name first) using the process environment for
/// the output override.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    parse_args_with_env(argv, std::env::var_os(OUT_ENV).map(PathBuf::from))
}

/// [`parse_args`] with the value of `VILENKIN_LAB_OUT` passed explicitly.
pub fn parse_args_with_env<I, T>(argv: I, out_env: Option<PathBuf>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    let mut options = cli.options;
    if let Some(path) = &options.config {
        options = options.clone().or(read_config(path)?);
    }
    if out_env.is_some() {
        options.out = out_env;
    }

    let level = options.level;
    let group_text = options.group.clone().unwrap_or_else(|| "2".into());
    let spec = Arc::new(build_group(&group_text, level)?);
    let weights_text = options.weights.clone().unwrap_or_else(|| "const".into());
    let weights = WeightKind::parse(&weights_text)?;
    if let Some(p) = &options.p {
        for &p in p {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::OutOfRange {
                    what: "p",
                    value: p.to_string(),
                    expected: "in (0, 1]".into(),
                }
                .into());
            }
        }
    }
    let seeds = match &options.seeds {
        Some(s) => parse_seeds(s)?,
        None => SeedSet::default(),
    };
    if let Some(d) = options.tolerance_drift {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::OutOfRange {
                what: "tolerance-drift",
                value: d.to_string(),
                expected: "a positive number".into(),
            }
            .into());
        }
    }
    let workers = match options.workers {
        Some(0) => {
            return Err(Error::OutOfRange {
                what: "workers",
                value: "0".into(),
                expected: ">= 1".into(),
            }
            .into())
        }
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    let suite_config = SuiteConfig {
        spec: spec.clone(),
        weights,
        p: options.p.clone().unwrap_or_default(),
        levels: options.levels.clone().unwrap_or_default(),
        seeds,
        n_max: options.nmax.clone().unwrap_or_default(),
        max_drift: options.tolerance_drift,
    };

    let task = match cli.command {
        Command::Transform {
            input,
            inverse,
            naive,
        } => Task::Transform {
            input,
            inverse,
            naive,
        },
        Command::Kernel { kind, n, n0 } => Task::Kernel { kind, n, n0 },
        Command::Verify => {
            let suites = options.suite.clone().unwrap_or_else(|| vec![Suite::Lemma2]);
            Task::Verify { suites }
        }
        Command::Explore => {
            if let Some(s) = options
                .suite
                .as_ref()
                .filter(|s| s.iter().any(|&s| s != Suite::Explore))
            {
                return Err(Error::Parse(format!(
                    "explore runs only the explore suite, got --suite {}",
                    s.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")
                ))
                .into());
            }
            Task::Verify {
                suites: vec![Suite::Explore],
            }
        }
    };
    if let Task::Verify { suites } = &task {
        for &suite in suites {
            suite_config.validate(suite)?;
        }
    }

    Ok(RunConfig {
        task,
        group: spec.to_string(),
        level: spec.level(),
        weights: weights_text,
        suite_config,
        out: options.out,
        format: options.format.unwrap_or_default(),
        workers,
        quiet: options.quiet,
    })
}

fn read_config(path: &Path) -> Result<Options> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// A single radix is repeated up to `level`; a list without a level uses
/// all of it.
fn build_group(text: &str, level: Option<usize>) -> Result<GroupSpec> {
    let radices = parse_radix_list(text)?;
    match (radices.len(), level) {
        (1, level) => {
            let level = level.unwrap_or(DEFAULT_LEVEL);
            GroupSpec::new(&vec![radices[0]; level.max(1)], level)
        }
        (_, level) => GroupSpec::new(&radices, level.unwrap_or(radices.len())),
    }
}

fn parse_seeds(text: &str) -> Result<SeedSet> {
    let number = |s: &str| -> Result<u64> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse(),
        };
        parsed.map_err(|_| Error::Parse(format!("seed value {s:?} is not an integer")))
    };
    match text.split_once(':') {
        Some((base, count)) => Ok(SeedSet::new(number(base)?, number(count)? as usize)),
        None => Ok(SeedSet::new(SeedSet::DEFAULT_BASE, number(text)? as usize)),
    }
}

/// Executes the task. Returns the exit code: 0 when every report passes,
/// 1 otherwise.
pub fn run(config: &RunConfig) -> Result<i32> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &config.task {
        Task::Transform {
            input,
            inverse,
            naive,
        } => run_transform(config, input, *inverse, *naive).map(|()| 0),
        Task::Kernel { kind, n, n0 } => run_kernel(config, *kind, *n, *n0).map(|()| 0),
        Task::Verify { suites } => {
            let reports = run_verify(config, suites)?;
            Ok(exit_code(&reports))
        }
    })
}

/// 0 iff every report passes.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().all(|r| r.pass()) {
        0
    } else {
        1
    }
}

fn run_verify(config: &RunConfig, suites: &[Suite]) -> Result<Vec<VerificationReport>> {
    let mut all = Vec::new();
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
    }
    for &suite in suites {
        for report in run_suite(suite, &config.suite_config)? {
            if !config.quiet {
                let drift = match report.summary.tolerance {
                    TolerancePolicy::MaxAbsBelow { .. } => "-".to_string(),
                    _ => format!("{:.4}", report.summary.drift),
                };
                println!(
                    "{} {} {} p={} max_ratio={:.6e} drift={} ({})",
                    if report.pass() { "PASS" } else { "FAIL" },
                    report.suite,
                    report.spec,
                    report
                        .parameters
                        .p
                        .map_or("-".into(), |p| format!("{p:.4}")),
                    report.summary.max_ratio,
                    drift,
                    report.summary.tolerance,
                );
            }
            if let Some(dir) = &config.out {
                let path = dir.join(report_file_name(&report, config.format));
                let file = create(&path)?;
                emit_report(&report, config.format, BufWriter::new(file))?;
            }
            all.push(report);
        }
    }
    Ok(all)
}

/// `<suite>.<ext>`, or `<suite>-p<p>.<ext>` for suites run per exponent.
pub fn report_file_name(report: &VerificationReport, format: ReportFormat) -> String {
    match report.parameters.p {
        Some(p) => format!("{}-p{}.{}", report.suite, p, format.extension()),
        _ => format!("{}.{}", report.suite, format.extension()),
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_output(config: &RunConfig, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &config.out {
        Some(path) => {
            let mut sink = BufWriter::new(create(path)?);
            write(&mut sink)
        }
        None => {
            let stdout = io::stdout();
            let mut sink = stdout.lock();
            write(&mut sink)
        }
    }
}

fn metadata(config: &RunConfig, extra: &[(&'static str, String)]) -> Vec<(&'static str, String)> {
    let mut meta = vec![
        ("radices", config.group.replace(',', " ")),
        ("level", config.level.to_string()),
    ];
    meta.extend_from_slice(extra);
    meta
}

fn run_transform(config: &RunConfig, input: &Path, inverse: bool, naive: bool) -> Result<()> {
    let spec = config.suite_config.spec.clone();
    let values: Vec<Complex64> = if inverse {
        let s = read_spectrum(open(input)?, spec)?;
        inverse_transform(&s).into_values()
    } else {
        let f = read_function(open(input)?, spec)?;
        let s = if naive {
            naive_transform(&f)
        } else {
            forward_transform(&f)
        };
        s.into_coeffs()
    };
    let kind = if inverse { "function" } else { "spectrum" };
    let meta = metadata(config, &[("kind", kind.to_string())]);
    with_output(config, |sink| write_values(sink, &meta, &values))
}

fn run_kernel(config: &RunConfig, kind: KernelChoice, n: usize, n0: Option<usize>) -> Result<()> {
    let spec = &config.suite_config.spec;
    let weights = || WeightSequence::new(config.suite_config.weights.clone(), n.max(1));
    let kernel = match kind {
        KernelChoice::Dirichlet => dirichlet_kernel(n, spec)?,
        KernelChoice::Fejer => fejer_kernel(n, spec)?,
        KernelChoice::FejerClosed => fejer_kernel_closed(n, spec)?,
        KernelChoice::Norlund => norlund_kernel_spectral(n, &weights()?, spec)?,
        KernelChoice::Tail => {
            let n0 = n0.ok_or_else(|| Error::Parse("the tail kernel needs --n0".into()))?;
            tail_kernel_spectral(n, n0, &weights()?, spec)?
        }
    };
    let meta = metadata(
        config,
        &[
            ("kernel", format!("{kind:?}").to_lowercase()),
            ("n", kernel.n.to_string()),
            ("weights", config.weights.clone()),
        ],
    );
    with_output(config, |sink| write_values(sink, &meta, kernel.values()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        let argv = std::iter::once("vilenkin-lab").chain(args.iter().copied());
        parse_args_with_env(argv, None)
    }

    #[test]
    fn lemma2_on_six_level_dyadic() {
        let c = parse(&["verify", "--group", "2,2,2,2,2,2", "--suite", "lemma2"]).unwrap();
        assert_eq!(c.level, 6);
        assert_eq!(
            c.task,
            Task::Verify {
                suites: vec![Suite::Lemma2]
            }
        );
        assert_eq!(c.suite_config.spec.size(), 64);
    }

    #[test]
    fn single_radix_is_repeated() {
        let c = parse(&["verify", "--group", "3", "--level", "4"]).unwrap();
        assert_eq!(c.suite_config.spec.size(), 81);
    }

    #[test]
    fn log_weights() {
        let c = parse(&["verify", "--weights", "log:a=1,b=2"]).unwrap();
        assert_eq!(
            c.suite_config.weights,
            WeightKind::LogFamily {
                alpha: 1.0,
                beta: 2
            }
        );
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            parse(&["verify", "--p", "0.6", "--suite", "theorem2"]),
            Err(CliError::Invalid(_))
        ));
        assert!(matches!(
            parse(&["verify", "--p", "1.5"]),
            Err(CliError::Invalid(_))
        ));
        assert!(matches!(
            parse(&["verify", "--group", "2,x"]),
            Err(CliError::Invalid(_))
        ));
        assert!(matches!(
            parse(&["verify", "--group", "2,1"]),
            Err(CliError::Invalid(_))
        ));
        assert!(matches!(
            parse(&["verify", "--bogus"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse(&["verify", "--suite", "lemma9"]),
            Err(CliError::Usage(_))
        ));
        let e = parse(&["verify", "--bogus"]).unwrap_err();
        assert_ne!(e.exit_code(), 0);
    }

    #[test]
    fn seeds_syntax() {
        assert_eq!(parse_seeds("10").unwrap(), SeedSet::new(0x5EED, 10));
        assert_eq!(parse_seeds("0x10:3").unwrap(), SeedSet::new(16, 3));
        assert_eq!(parse_seeds("7:2").unwrap(), SeedSet::new(7, 2));
        assert!(parse_seeds("a:2").is_err());
    }

    #[test]
    fn env_overrides_out_and_flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(
            &cfg,
            "group = \"2,3\"\nlevel = 2\nout = \"from-file\"\nworkers = 3\n",
        )
        .unwrap();
        let argv = [
            "vilenkin-lab",
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--level",
            "1",
        ];
        let c = parse_args_with_env(argv, None).unwrap();
        assert_eq!(c.group, "2");
        assert_eq!(c.workers, 3);
        assert_eq!(c.out, Some(PathBuf::from("from-file")));
        let c = parse_args_with_env(argv, Some("from-env".into())).unwrap();
        assert_eq!(c.out, Some(PathBuf::from("from-env")));

        std::fs::write(&cfg, "colour = 1\n").unwrap();
        let e = parse_args_with_env(argv, None).unwrap_err();
        assert!(matches!(e, CliError::Invalid(Error::Parse(ref m)) if m.contains("colour")));
    }

    #[test]
    fn help_lists_every_suite() {
        let e = parse(&["verify", "--help"]).unwrap_err();
        let CliError::Usage(e) = e else { panic!() };
        let help = e.render().to_string();
        for s in Suite::ALL {
            assert!(help.contains(s.name()), "{} missing from help", s.name());
        }
    }
}
