//! `igusa` command-line interface.
//!
//! Exit codes: 0 success, 1 property violation (with `--assert`, or any
//! failure in `corpus --run`), 2 invalid input, 3 budget exceeded, 4 other
//! computation failure.

mod commands;
mod json;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "igusa", version, about = "Exact exponential sums, Igusa zeta series and related experiments")]
pub struct Cli {
    /// TOML file whose keys are long flag names; its values override flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Maximum number of evaluations for enumerations.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Exit with status 1 when a checked property fails.
    #[arg(long = "assert", global = true)]
    pub assert_mode: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct PolyArgs {
    /// Polynomial in x1..xn, e.g. "x1^2+x2^3".
    #[arg(long)]
    pub f: String,
    /// Support: full, origin, points:a,b;c,d or eq:g1;g2.
    #[arg(long = "Z", default_value = "full")]
    pub z: String,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Exponential sum E_{f,Z} over Z_p (padic), F_q((t)) (tadic) or the two-term form (simplified).
    Expsum {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value = "padic")]
        side: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long)]
        m: u32,
        /// Unit u for z = u p^{-m}; comma-separated coordinates when e > 1.
        #[arg(long, default_value = "1")]
        u: String,
        /// Laurent coefficients a_{-m},...,a_{-1} as field element indices.
        #[arg(long = "z")]
        zc: Option<String>,
        #[arg(long)]
        b0: Option<u32>,
        #[arg(long)]
        bm: Option<u32>,
        /// Enumerate only singular residues (exact for m >= 2).
        #[arg(long)]
        fast: bool,
    },
    /// Jet polynomials f_0..f_r.
    Jets {
        #[arg(long)]
        f: String,
        #[arg(long)]
        r: usize,
    },
    /// Point counts of the strata Z_{m-1,i} over F_q, or a dimension estimate.
    Strata {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long)]
        m: usize,
        /// Single stratum index (all 0..m-1 when absent).
        #[arg(long)]
        i: Option<usize>,
        /// Estimate dim Z_{m-1,m-2} from counts over F_{q^r}, r <= rmax.
        #[arg(long)]
        dimension: bool,
        #[arg(long, default_value_t = 3)]
        rmax: u32,
        /// Reference lct for the dimension bound.
        #[arg(long)]
        lct: Option<String>,
    },
    /// Reparameterization t -> t_1 and the derived pair (b_0, b_{m-1}).
    Reparam {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long = "z")]
        zc: String,
    },
    /// Gauss sums of multiplicative characters.
    Gauss {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        c: u32,
        #[arg(long)]
        chi: Option<String>,
    },
    /// Zeta series coefficients through t^order.
    ZetaSeries {
        #[command(flatten)]
        zeta: ZetaArgs,
    },
    /// Rational reconstruction of the zeta series.
    ZetaFit {
        #[command(flatten)]
        zeta: ZetaArgs,
        #[arg(long)]
        max_num: Option<usize>,
        #[arg(long)]
        max_den: Option<usize>,
    },
    /// Non-trivial poles of the fitted zeta function.
    Poles {
        #[command(flatten)]
        zeta: ZetaArgs,
        #[arg(long)]
        max_num: Option<usize>,
        #[arg(long)]
        max_den: Option<usize>,
    },
    /// Heuristic sigma over sampled primes and critical values.
    MoiEst {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value = "5,7,11,13")]
        primes: String,
        /// Truncation order (default 20 for n <= 2, 6 otherwise).
        #[arg(long)]
        order: Option<usize>,
        /// Integer critical values (default: naive lifts of critical residues).
        #[arg(long)]
        critical_values: Option<String>,
    },
    /// Exponential sum against its expression through zeta coefficients and Gauss sums.
    CoeffCheck {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        u: u64,
    },
    /// Evaluate Denef's formula from resolution data.
    DenefEval {
        #[command(flatten)]
        data: DenefArgs,
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// Compare Denef's formula with the zeta series.
    DenefCheck {
        #[command(flatten)]
        data: DenefArgs,
        /// Polynomial the data describes (derived for --monomial).
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
    /// S_r for r <= rmax and the fitted weight.
    Weights {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long, default_value_t = 0)]
        b0: u32,
        #[arg(long, default_value_t = 1)]
        bm: u32,
        #[arg(long, default_value_t = 3)]
        rmax: u32,
    },
    /// p-adic against Laurent-series sums with matched angular component.
    Transfer {
        #[arg(long)]
        f: Option<String>,
        #[arg(long = "Z", default_value = "full")]
        z: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        u: Option<String>,
        #[arg(long = "z")]
        zc: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the transfer grid of the manifest over the corpus.
        #[arg(long)]
        corpus: bool,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// |E| against p^{-m sigma} over primes and m.
    Conj11 {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        sigma: String,
        #[arg(long, default_value = "5,7,11,13")]
        primes: String,
        #[arg(long, default_value = "1..=4")]
        ms: String,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Fitted weights against 2(mn - m moi).
    ConjWeight {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "5,7")]
        primes: String,
        #[arg(long)]
        moi: String,
        #[arg(long, default_value_t = 5)]
        b_samples: usize,
        #[arg(long, default_value_t = 3)]
        rmax: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// S_r(f1 + f2) = S_r(f1) S_r(f2) on disjoint variables.
    ThomSeb {
        #[arg(long)]
        f1: Option<String>,
        #[arg(long = "Z1", default_value = "origin")]
        z1: String,
        #[arg(long)]
        f2: Option<String>,
        #[arg(long = "Z2", default_value = "origin")]
        z2: String,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value = "5")]
        p: String,
        #[arg(long, default_value_t = 1)]
        b0: u32,
        #[arg(long, default_value_t = 1)]
        bm: u32,
        #[arg(long, default_value_t = 4)]
        rmax: u32,
        /// Check every composite pair of the corpus.
        #[arg(long)]
        corpus: bool,
    },
    /// Zeta series and sums of a pair assumed similar at the origin.
    Similar {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value = "5,7,11")]
        primes: String,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value = "1..=3")]
        ms: String,
    },
    /// Random admissible blow-up sequences and the ratio 1/(dk) check.
    BlowupCheck {
        #[arg(long, default_value = "0..100")]
        seeds: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: u64,
        #[arg(long, default_value_t = 6)]
        length: usize,
        /// Print the cusp sequence instead.
        #[arg(long)]
        cusp: bool,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// List the corpus, or run a manifest over it.
    Corpus {
        #[arg(long)]
        run: bool,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        corpus_file: Option<PathBuf>,
        /// Also write CSV tables into this directory.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ZetaArgs {
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long)]
    pub p: u64,
    /// Character id: trivial, e/d (conductor 1) or c:k.
    #[arg(long, default_value = "trivial")]
    pub chi: String,
    /// Truncation order (default 20 for n <= 2, 6 otherwise).
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct DenefArgs {
    /// Resolution data file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Exponents of a monomial, e.g. "2,1".
    #[arg(long)]
    pub monomial: Option<String>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long = "Z", default_value = "full")]
    pub z: String,
    #[arg(long, default_value = "trivial")]
    pub chi: String,
}

/// Merge config-file values into argv: each key replaces the flag of that name.
fn apply_config(args: Vec<OsString>, path: &PathBuf) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| format!("config {}: {}", path.display(), e))?;
    let mut out: Vec<OsString> = Vec::with_capacity(args.len());
    let mut skip_value = false;
    for a in args {
        if skip_value {
            skip_value = false;
            if !a.to_string_lossy().starts_with("--") {
                continue;
            }
        }
        let s = a.to_string_lossy().to_string();
        if let Some(flag) = s.strip_prefix("--") {
            let name = flag.split('=').next().unwrap();
            if table.contains_key(name) {
                skip_value = !flag.contains('=');
                continue;
            }
        }
        out.push(a);
    }
    for (k, v) in &table {
        match v {
            toml::Value::Boolean(true) => out.push(format!("--{}", k).into()),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => out.extend([format!("--{}", k).into(), s.into()]),
            toml::Value::Integer(i) => out.extend([format!("--{}", k).into(), i.to_string().into()]),
            toml::Value::Float(x) => out.extend([format!("--{}", k).into(), x.to_string().into()]),
            toml::Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|x| match x {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                out.extend([format!("--{}", k).into(), parts.join(",").into()]);
            }
            _ => return Err(format!("config key {} has an unsupported value", k)),
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = match &cli.config {
        None => cli,
        Some(path) => {
            let merged = match apply_config(args, path) {
                Ok(a) => a,
                Err(msg) => {
                    eprintln!("error: {}", msg);
                    return ExitCode::from(2);
                }
            };
            match Cli::try_parse_from(merged) {
                Ok(c) => c,
                Err(e) => {
                    let _ = e.print();
                    return ExitCode::from(2);
                }
            }
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(4);
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => {
            if let Err(e) = commands::emit(&cli, &outcome.text) {
                eprintln!("error: {}", e);
                return ExitCode::from(4);
            }
            if (cli.assert_mode || outcome.strict) && outcome.violated {
                eprintln!("property violated: {}", outcome.note);
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            use igusa::Error;
            let code = match &e {
                Error::Parse(_) | Error::Invalid(_) | Error::NotPrime(_) => 2,
                Error::Budget(_) => 3,
                Error::Fit(_) | Error::Io(_) => 4,
            };
            eprintln!("error: {}", e);
            if code == 3 {
                eprintln!("partial progress: the computation stopped before any report was written; raise --budget or lower the order");
            }
            ExitCode::from(code)
        }
    }
}
