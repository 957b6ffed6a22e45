use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use paraquon::checks::{CheckContext, CheckRegistry};
use paraquon::format::fmt17;
use paraquon::jw::{build_rep, residual_scan, CChoice, Relation};
use paraquon::oracle::OracleLimits;
use paraquon::params::{q_matrix_from_entries, PresetArgs, PresetRegistry, Sign};
use paraquon::report::GramReport;
use paraquon::spectral::{
    self, default_phi, linspace, positivity_scan, rank_scan_anyon, ScanReport,
};
use paraquon::{build_gram, DeformationSpec, Error, Letter, Oracle, Order, Result, Word};

mod config;

use config::{ConfigFile, QFile};

#[derive(Parser, Debug)]
#[command(
    name = "paraquon",
    version,
    about = "Deformed Green-ansatz oscillators: Gram matrices, spectra and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gram matrix of all orderings of --indices.
    Gram,
    /// Minimum eigenvalue and rank of the Gram matrix along a q grid in [-1, 1]
    /// (a single point when --q is given).
    Spectrum,
    /// Rank of the anyon Gram matrix along a lambda grid in [0, 1].
    RankScan,
    /// Run a named check, or `all`.
    Verify { check: String },
    /// Vacuum expectation value of an operator word, e.g. "a(i2) a(i1) a+(i2) a+(i1)".
    Vev { word: String },
    /// Jordan-Wigner relation residuals on a truncated boson space.
    Jw,
    /// List presets and checks.
    List,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// quon, para, multiparam, anyon or speicher.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Order: a positive integer or `inf`.
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<i64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Phase phi_ij used for every i < j.
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// TOML file with `q = [[i, j, re, im], ...]`.
    #[arg(long, global = true)]
    qfile: Option<PathBuf>,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    sites: Option<usize>,
    /// Comma-separated site labels, e.g. i1,i2,i3.
    #[arg(long, global = true)]
    indices: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Grid size for scans.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Per-mode occupation cutoff for `jw`.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Use c = 0 instead of the lower-triangular phase matrix in `jw`.
    #[arg(long, global = true)]
    zero_c: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

/// Flags merged over the config file.
struct RunConfig {
    opts: Opts,
    file: ConfigFile,
    format: Format,
    seed: u64,
    tol: Option<f64>,
}

impl RunConfig {
    fn new(opts: Opts) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let format = match (opts.format, file.cli.format.as_deref()) {
            (Some(f), _) => f,
            (None, None | Some("text")) => Format::Text,
            (None, Some("csv")) => Format::Csv,
            (None, Some(other)) => {
                return Err(Error::InvalidArgs(format!("unknown format `{other}`")))
            }
        };
        let seed = opts.seed.or(file.cli.seed).unwrap_or(0);
        let tol = opts.tol.or(file.cli.tol).or(file.spectral.tol);
        Ok(RunConfig {
            opts,
            file,
            format,
            seed,
            tol,
        })
    }

    fn threads(&self) -> Option<usize> {
        self.opts.threads.or(self.file.cli.threads)
    }

    fn order(&self) -> Result<Option<Order>> {
        self.opts
            .p
            .as_deref()
            .or(self.file.params.p.as_deref())
            .map(Order::parse)
            .transpose()
    }

    fn q(&self) -> Option<f64> {
        self.opts.q.or(self.file.params.q)
    }

    fn epsilon(&self) -> Result<Option<Sign>> {
        self.opts
            .epsilon
            .or(self.file.params.epsilon)
            .map(Sign::from_int)
            .transpose()
    }

    fn lambda(&self) -> Option<f64> {
        self.opts
            .lambda
            .or(self.file.params.lambda)
            .or(self.file.jw.lambda)
    }

    fn mu(&self) -> Option<f64> {
        self.opts.mu.or(self.file.jw.mu)
    }

    fn sites(&self) -> Option<usize> {
        self.opts.sites.or(self.file.params.sites)
    }

    fn points(&self, default: usize) -> usize {
        self.opts
            .points
            .or(self.file.spectral.points)
            .unwrap_or(default)
    }

    fn phi_matrix(&self, sites: usize) -> Option<DMatrix<f64>> {
        self.opts.phi.or(self.file.params.phi).map(|phi| {
            DMatrix::from_fn(sites, sites, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Less => phi,
                std::cmp::Ordering::Greater => -phi,
                std::cmp::Ordering::Equal => 0.0,
            })
        })
    }

    fn q_matrix(&self) -> Result<Option<DMatrix<num_complex::Complex64>>> {
        let path = match (&self.opts.qfile, &self.file.params.qfile) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => PathBuf::from(p),
            (None, None) => return Ok(None),
        };
        let f = QFile::load(&path)?;
        Ok(Some(q_matrix_from_entries(f.sites(), &f.q)?))
    }

    /// 0-based base tuple from `--indices` or `[gram] indices`.
    fn indices(&self) -> Result<Vec<usize>> {
        if let Some(text) = &self.opts.indices {
            return parse_indices(text);
        }
        match &self.file.gram.indices {
            Some(v) if v.iter().all(|&k| k >= 1) && !v.is_empty() => {
                Ok(v.iter().map(|k| k - 1).collect())
            }
            Some(_) => Err(Error::InvalidArgs(
                "indices are 1-based and non-empty".into(),
            )),
            None => Err(Error::InvalidArgs("missing --indices".into())),
        }
    }

    fn preset_name(&self) -> Option<&str> {
        self.opts
            .preset
            .as_deref()
            .or(self.file.params.preset.as_deref())
    }

    fn preset_args(&self, sites_hint: usize) -> Result<PresetArgs> {
        let q_matrix = self.q_matrix()?;
        let sites = self
            .sites()
            .or(q_matrix.as_ref().map(|m| m.nrows()))
            .unwrap_or(sites_hint);
        Ok(PresetArgs {
            sites: Some(sites),
            order: self.order()?,
            q: self.q(),
            epsilon: self.epsilon()?,
            lambda: self.lambda(),
            phi: self.phi_matrix(sites),
            q_matrix,
        })
    }

    /// Spec from `--preset` if given, else `[spec]`, else the config preset
    /// or `default_preset`.
    fn spec(&self, sites_hint: usize, default_preset: &str) -> Result<DeformationSpec> {
        if self.opts.preset.is_none() {
            if let Some(cfg) = &self.file.spec {
                return DeformationSpec::from_config(cfg);
            }
        }
        let name = self.preset_name().unwrap_or(default_preset);
        PresetRegistry::default().build(name, &self.preset_args(sites_hint)?)
    }
}

fn parse_indices(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let v: usize = tok
                .strip_prefix('i')
                .unwrap_or(tok)
                .parse()
                .map_err(|_| Error::Parse(format!("bad index `{tok}`")))?;
            if v == 0 {
                return Err(Error::Parse("indices are 1-based".into()));
            }
            Ok(v - 1)
        })
        .collect()
}

fn max_site(base: &[usize]) -> usize {
    base.iter().max().map_or(1, |m| m + 1)
}

fn cmd_gram(run: &RunConfig) -> Result<String> {
    let base = run.indices()?;
    let spec = run.spec(max_site(&base), "quon")?;
    let g = build_gram(&spec, &base)?;
    let report = GramReport::new(&spec, &g);
    Ok(match run.format {
        Format::Text => report.to_toml(),
        Format::Csv => report.to_csv(),
    })
}

fn scan_output(run: &RunConfig, label: &str, report: &ScanReport) -> String {
    match run.format {
        Format::Csv => report.to_csv(),
        Format::Text => {
            let mut out = String::new();
            for pt in &report.points {
                out.push_str(&format!(
                    "{label}={} min_eig={} rank={} dim={}\n",
                    fmt17(pt.param),
                    fmt17(pt.min_eig),
                    pt.rank,
                    pt.dim
                ));
            }
            let below = report.violations().len();
            out.push_str(&format!(
                "negative_points={below} tolerance={}\n",
                fmt17(report.tolerance)
            ));
            out
        }
    }
}

fn cmd_spectrum(run: &RunConfig) -> Result<String> {
    let base = run.indices()?;
    let name = run.preset_name().unwrap_or("quon").to_string();
    let grid = match run.q() {
        Some(q) => vec![q],
        None => linspace(-1.0, 1.0, run.points(21)),
    };
    let args = run.preset_args(max_site(&base))?;
    let registry = PresetRegistry::default();
    let report = positivity_scan(
        |q| {
            registry.build(
                &name,
                &PresetArgs {
                    q: Some(q),
                    ..args.clone()
                },
            )
        },
        &base,
        &grid,
        run.tol,
    )?;
    let mut out = scan_output(run, "q", &report);
    if run.format == Format::Text && grid.len() == 1 {
        let spec = registry.build(
            &name,
            &PresetArgs {
                q: Some(grid[0]),
                ..args
            },
        )?;
        let s = spectral::spectrum(&build_gram(&spec, &base)?, None)?;
        let eig: Vec<String> = s.eigenvalues.iter().map(|&x| fmt17(x)).collect();
        out.push_str(&format!("eigenvalues=[{}]\n", eig.join(", ")));
    }
    Ok(out)
}

fn cmd_rank_scan(run: &RunConfig) -> Result<String> {
    let base = run.indices()?;
    let sites = run.sites().unwrap_or(max_site(&base));
    let phi = run.phi_matrix(sites).unwrap_or_else(|| default_phi(sites));
    let order = run.order()?.unwrap_or(Order::Finite(2));
    let grid = match run.lambda() {
        Some(l) => vec![l],
        None => linspace(0.0, 1.0, run.points(21)),
    };
    let report = rank_scan_anyon(&grid, &phi, order, &base, run.tol)?;
    Ok(scan_output(run, "lambda", &report))
}

fn cmd_verify(run: &RunConfig, name: &str) -> Result<(String, bool)> {
    let registry = CheckRegistry::default();
    let ctx = CheckContext {
        order: run.order()?,
        q: run.q(),
        epsilon: run.epsilon()?,
        lambda: run.lambda(),
        mu: run.mu(),
        phi: run.sites().and_then(|s| run.phi_matrix(s)),
        q_matrix: run.q_matrix()?,
        sites: run.sites(),
        tol: run.tol,
        seed: run.seed,
    };
    let checks: Vec<_> = if name == "all" {
        registry.iter().collect()
    } else {
        vec![registry.get(name)?]
    };
    let mut out = String::new();
    let mut ok = true;
    for check in checks {
        let outcome = check.run(&ctx)?;
        ok &= outcome.passed;
        match run.format {
            Format::Text => out.push_str(&format!("{}\n", outcome.line())),
            Format::Csv => {
                if out.is_empty() {
                    out.push_str("check,status,max_residual,threshold\n");
                }
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    outcome.name,
                    if outcome.passed { "PASS" } else { "FAIL" },
                    fmt17(outcome.max_residual),
                    fmt17(outcome.threshold)
                ));
            }
        }
    }
    Ok((out, ok))
}

fn cmd_vev(run: &RunConfig, text: &str) -> Result<String> {
    let word = Word::parse(text)?;
    let sites = word.letters.iter().map(|l| l.site() + 1).max().unwrap_or(1);
    let greens = word
        .letters
        .iter()
        .filter_map(|l| match *l {
            Letter::B { green, .. } => Some(green + 1),
            _ => None,
        })
        .max()
        .unwrap_or(1);
    let mut args = run.preset_args(sites)?;
    args.order = args.order.or(Some(Order::Finite(greens)));
    let spec = match (run.preset_name(), &run.file.spec) {
        (None, Some(cfg)) => DeformationSpec::from_config(cfg)?,
        (name, _) => {
            if name.is_none() || name == Some("quon") {
                args.q = args.q.or(Some(0.0));
            }
            PresetRegistry::default().build(name.unwrap_or("quon"), &args)?
        }
    };
    let oracle = Oracle::with_limits(&spec, OracleLimits::default());
    let value = if word.letters.iter().all(Letter::is_b) {
        oracle.vev_b_word(&word)?
    } else {
        oracle.vev_a_word(&word)?
    }
    .value;
    Ok(match run.format {
        Format::Text => format!("{} {}\n", fmt17(value.re), fmt17(value.im)),
        Format::Csv => format!("re,im\n{},{}\n", fmt17(value.re), fmt17(value.im)),
    })
}

fn cmd_jw(run: &RunConfig) -> Result<String> {
    let sites = run.sites().unwrap_or(2);
    let p = match run.order()?.unwrap_or(Order::Finite(2)) {
        Order::Finite(p) => p,
        Order::Infinite => return Err(Error::InvalidOrder("jw needs a finite order".into())),
    };
    let cutoff = run.opts.cutoff.or(run.file.jw.cutoff).unwrap_or(3);
    let rep = build_rep(sites, p, cutoff)?;
    let axis = [0.0, 0.25, 0.5, 0.75, 1.0];
    let lambdas = run.lambda().map_or(axis.to_vec(), |l| vec![l]);
    let mus = run.mu().map_or(axis.to_vec(), |m| vec![m]);
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| mus.iter().map(move |&m| (l, m)))
        .collect();
    let choice = if run.opts.zero_c {
        CChoice::Zero
    } else {
        CChoice::LowerTriangular(run.phi_matrix(sites).unwrap_or_else(|| default_phi(sites)))
    };
    let report = residual_scan(&rep, &points, &choice)?;
    Ok(match run.format {
        Format::Csv => report.to_csv(),
        Format::Text => [
            Relation::R1,
            Relation::R2,
            Relation::R3,
            Relation::R3Literal,
        ]
        .iter()
        .map(|&r| format!("{} max_residual={}\n", r.id(), fmt17(report.max(r))))
        .collect(),
    })
}

fn cmd_list() -> String {
    let mut out = String::from("presets:\n");
    let presets = PresetRegistry::default();
    for name in presets.names() {
        let p = presets.get(name).expect("listed");
        out.push_str(&format!("  {name:<12} {}\n", p.summary()));
    }
    out.push_str("checks:\n");
    for c in CheckRegistry::default().iter() {
        out.push_str(&format!("  {:<12} {}\n", c.name(), c.summary()));
    }
    out
}

fn emit(run: &RunConfig, text: &str) -> Result<()> {
    match &run.opts.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidArgs(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::InvalidArgs(format!("stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let run = RunConfig::new(cli.opts)?;
    if let Some(n) = run.threads() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgs(format!("threads: {e}")))?;
    }
    let (text, ok) = match &cli.command {
        Command::Gram => (cmd_gram(&run)?, true),
        Command::Spectrum => (cmd_spectrum(&run)?, true),
        Command::RankScan => (cmd_rank_scan(&run)?, true),
        Command::Verify { check } => cmd_verify(&run, check)?,
        Command::Vev { word } => (cmd_vev(&run, word)?, true),
        Command::Jw => (cmd_jw(&run)?, true),
        Command::List => (cmd_list(), true),
    };
    emit(&run, &text)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
