use std::fmt::Write as _;
use std::io::{self as stdio, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use betti_lab::cycles::{count_table, CountOptions};
use betti_lab::exponents::{derive_exponents, AlphaProfile, ExponentSummary};
use betti_lab::harness::experiments::{run_clt, run_ld, run_moment_check, run_slln};
use betti_lab::harness::{io, ExperimentConfig, OutputFormat};
use betti_lab::homology::{betti, betti_vector};
use betti_lab::oracle::moment_report;
use betti_lab::sampler::{sample_complex, Complex, SampleConfig};

#[derive(Parser, Debug)]
#[command(name = "betti-lab", version, about = "Betti numbers of multi-parameter random simplicial complexes")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived exponents, regime and limit constants of a profile.
    Exponents {
        #[arg(long)]
        alpha: AlphaProfile,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, conflicts_with = "table")]
        json: bool,
        #[arg(long)]
        table: bool,
    },
    /// Sample one complex and write it as JSON.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: AlphaProfile,
        /// Highest sampled dimension.
        #[arg(long)]
        dmax: usize,
        #[arg(long, default_value_t = 0)]
        rep: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Betti numbers of a complex file.
    Betti {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, conflicts_with = "all")]
        dim: Option<usize>,
        #[arg(long)]
        all: bool,
    },
    /// Strongly connected component counts of a complex file.
    Counts {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        jmax: Option<usize>,
        /// First dimension with positive alpha; read from the file's alpha when absent.
        #[arg(long)]
        q: Option<usize>,
        /// Count every containing subset instead of component vertex sets.
        #[arg(long)]
        containing: bool,
    },
    /// Exact and asymptotic moments at one n.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: AlphaProfile,
        #[arg(long)]
        m: usize,
        /// JSON is the only output; accepted for symmetry.
        #[arg(long)]
        json: bool,
    },
    /// Law of large numbers campaign.
    Slln(Campaign),
    /// Central limit campaign.
    Clt(Campaign),
    /// Lower-tail campaign.
    Ld(Campaign),
    /// Empirical against exact moments.
    Moments(Campaign),
}

#[derive(Args, Debug)]
struct Campaign {
    /// TOML file mirroring the experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<AlphaProfile>,
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    dmax: Option<usize>,
    #[arg(long)]
    jmax: Option<usize>,
    /// Comma-separated relative deficits for the lower tail.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long)]
    no_plots: bool,
    #[arg(long)]
    no_records: bool,
    #[arg(long)]
    allow_unreachable_tail: bool,
}

impl Campaign {
    fn config(&self, cli: &Cli) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = &self.alpha {
            c.alpha = a.clone();
        }
        macro_rules! set {
            ($($field:ident = $value:expr),*) => {$(if let Some(v) = $value { c.$field = v; })*};
        }
        set!(
            m = self.m,
            n = self.n.clone(),
            replications = self.replications,
            epsilons = self.epsilons.clone(),
            seed = cli.seed,
            out_dir = cli.out_dir.clone()
        );
        if self.dmax.is_some() {
            c.d_max_build = self.dmax;
        }
        if self.jmax.is_some() {
            c.j_max = self.jmax;
        }
        if cli.threads.is_some() {
            c.threads = cli.threads;
        }
        if let Some(f) = cli.format {
            c.format = f.into();
        }
        c.plots &= !self.no_plots;
        c.write_records &= !self.no_records;
        c.allow_unreachable_tail |= self.allow_unreachable_tail;
        c.validate()?;
        Ok(c)
    }
}

/// Writes to stdout; a closed pipe is reported as `BrokenPipe`.
fn emit(text: &str) -> Result<()> {
    let mut out = stdio::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn print_table(s: &ExponentSummary) -> Result<()> {
    let mut o = String::new();
    writeln!(o, "alpha = ({})", s.alpha)?;
    writeln!(o, "{:>4} {:>12} {:>12}", "j", "psi_j", "tau_j")?;
    // psi starts at j = 1, tau at j = 0
    for (j, t) in s.tau.iter().enumerate() {
        match j.checked_sub(1).and_then(|i| s.psi.get(i)) {
            Some(p) => writeln!(o, "{j:>4} {p:>12.6} {t:>12.6}")?,
            None => writeln!(o, "{j:>4} {:>12} {t:>12.6}", "-")?,
        }
    }
    writeln!(o, "q = {}", s.q)?;
    match s.k {
        Some(k) => writeln!(o, "k = {k}")?,
        None => writeln!(o, "k = none")?,
    }
    if let (Some(m), Some(regime)) = (s.m, s.regime) {
        writeln!(o, "m = {m}, regime {regime:?}")?;
    }
    if let Some(c) = &s.constants {
        writeln!(o, "target exponent = {:.6}, limit = {:.6e}", c.target_exponent, c.slln_limit)?;
        writeln!(
            o,
            "CLT scale n^{:.6}, variance-lemma constant {:.6e}, theorem constant {:.6e}",
            c.clt_scale_exponent, c.variance_lemma_constant, c.theorem_constant
        )?;
        writeln!(o, "LD scale n^{:.6}, rate constant {:.6e}", c.ld_scale_exponent, c.ld_rate_constant)?;
    }
    if let Some(d) = s.truncation_dimension {
        writeln!(o, "truncation dimension D = {d}")?;
    }
    for note in &s.notes {
        writeln!(o, "note: {note}")?;
    }
    emit(&o)
}

fn read_complex(path: &Path) -> Result<Complex> {
    Complex::read_json(path).with_context(|| format!("reading {}", path.display()))
}

fn report_written(paths: Vec<PathBuf>) -> Result<()> {
    let list: String = paths.iter().map(|p| format!("{}\n", p.display())).collect();
    emit(&list)
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Exponents { alpha, m, json: _, table } => {
            let summary = derive_exponents(alpha)?.summary(*m);
            if *table {
                print_table(&summary)?;
            } else {
                print_json(&summary)?;
            }
        }
        Command::Sample { n, alpha, dmax, rep, out } => {
            let complex = sample_complex(&SampleConfig {
                n: *n,
                alpha: alpha.clone(),
                d_max_build: *dmax,
                seed,
                replication_index: *rep,
            })?;
            match out {
                Some(path) => complex.write_json(path)?,
                None => print_json(&complex.to_json())?,
            }
        }
        Command::Betti { input, dim, all: _ } => {
            let complex = read_complex(input)?;
            match dim {
                Some(m) => print_json(&serde_json::json!({ "dim": m, "betti": betti(&complex, *m)? }))?,
                None => print_json(&betti_vector(&complex))?,
            }
        }
        Command::Counts { input, m, jmax, q, containing } => {
            let complex = read_complex(input)?;
            let q = match (q, complex.provenance()) {
                (Some(q), _) => *q,
                (None, Some(p)) => derive_exponents(&p.alpha)?.q(),
                (None, None) => bail!("the complex file has no alpha; pass --q"),
            };
            let options = CountOptions {
                j_max: *jmax,
                spanning: !containing,
            };
            print_json(&count_table(&complex, *m, q, options)?)?;
        }
        Command::Oracle { n, alpha, m, json: _ } => print_json(&moment_report(*n, alpha, *m)?)?,
        Command::Slln(c) => report_written(io::write_slln(&run_slln(&c.config(cli)?)?)?)?,
        Command::Clt(c) => report_written(io::write_clt(&run_clt(&c.config(cli)?)?)?)?,
        Command::Ld(c) => report_written(io::write_ld(&run_ld(&c.config(cli)?)?)?)?,
        Command::Moments(c) => report_written(io::write_moments(&run_moment_check(&c.config(cli)?)?)?)?,
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(&cli) {
        let closed = e
            .downcast_ref::<stdio::Error>()
            .is_some_and(|io| io.kind() == stdio::ErrorKind::BrokenPipe);
        if closed {
            return;
        }
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
