//! Command-line front end. Every subcommand reads the same flat set of
//! options, which may also come from a JSON document (`--config`); flags
//! win over the document. Exit codes: 0 pass, 1 error, 2 threshold fail.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::atomic_write;

#[derive(Parser, Debug)]
#[command(name = "intergrow", version, about = "Exponential sums and equidistribution diagnostics for x^(log^c x)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Partial sums of e(F(n)) or e(F-floor phases).
    Expsum(ExperimentConfig),
    /// Weyl sums of the shifted vector sequence at a frequency vector.
    Weyl(ExperimentConfig),
    /// Sums of e(alpha F(n)) over a grid of alpha.
    Goodness(ExperimentConfig),
    /// Weyl battery, star discrepancy and residue histograms.
    Equi(ExperimentConfig),
    /// Rewrite a shifted combination as a polynomial in Delta.
    Decompose(ExperimentConfig),
    /// Grid certificates of the derivative bounds and Karacuba parameters.
    Certify(ExperimentConfig),
    /// Correlation tensor and Bernoulli verdict.
    Fingerprint(ExperimentConfig),
    /// Norm of A_N f - Pf for a torus or cyclic system.
    Vn(ExperimentConfig),
    /// Correlation of a(n) or b(n) with an orbit of a rotation or the skew product.
    Zeroentropy(ExperimentConfig),
    /// Time versus space averages for the skew product.
    Skewdemo(ExperimentConfig),
    /// Fit modulus ~ exp(-kappa log^(1-2c) N) to a series.
    Fitdecay(ExperimentConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expsum(_) => "expsum",
            Command::Weyl(_) => "weyl",
            Command::Goodness(_) => "goodness",
            Command::Equi(_) => "equi",
            Command::Decompose(_) => "decompose",
            Command::Certify(_) => "certify",
            Command::Fingerprint(_) => "fingerprint",
            Command::Vn(_) => "vn",
            Command::Zeroentropy(_) => "zeroentropy",
            Command::Skewdemo(_) => "skewdemo",
            Command::Fitdecay(_) => "fitdecay",
        }
    }

    pub fn from_name(name: &str, cfg: ExperimentConfig) -> Result<Command> {
        Ok(match name {
            "expsum" => Command::Expsum(cfg),
            "weyl" => Command::Weyl(cfg),
            "goodness" => Command::Goodness(cfg),
            "equi" => Command::Equi(cfg),
            "decompose" => Command::Decompose(cfg),
            "certify" => Command::Certify(cfg),
            "fingerprint" => Command::Fingerprint(cfg),
            "vn" => Command::Vn(cfg),
            "zeroentropy" => Command::Zeroentropy(cfg),
            "skewdemo" => Command::Skewdemo(cfg),
            "fitdecay" => Command::Fitdecay(cfg),
            _ => return Err(Error::Input(format!("unknown command {name:?}"))),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        match self {
            Command::Expsum(c)
            | Command::Weyl(c)
            | Command::Goodness(c)
            | Command::Equi(c)
            | Command::Decompose(c)
            | Command::Certify(c)
            | Command::Fingerprint(c)
            | Command::Vn(c)
            | Command::Zeroentropy(c)
            | Command::Skewdemo(c)
            | Command::Fitdecay(c) => c,
        }
    }
}

macro_rules! config_struct {
    ($( $(#[$m:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        /// All options; each subcommand uses the ones it needs.
        #[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
        #[serde(deny_unknown_fields)]
        pub struct ExperimentConfig {
            /// JSON document with the same field names; a report's embedded
            /// `config` also works.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            $( $(#[$m])* #[serde(default, skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>, )*
        }

        impl ExperimentConfig {
            /// Fields set in `self` win over `base`.
            pub fn over(self, base: ExperimentConfig) -> ExperimentConfig {
                ExperimentConfig { config: self.config, $( $field: self.$field.or(base.$field), )* }
            }
        }
    };
}

config_struct! {
    #[arg(long)] c: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] shifts: Vec<i64>,
    /// Integers, p/q, decimals or expressions such as sqrt(2)-1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] alphas: Vec<String>,
    #[arg(long = "N")] #[serde(rename = "N")] n: u64,
    /// Checkpoints 2^k1..2^k2 from one run, written `k1..k2`.
    #[arg(long)] dyadic: String,
    #[arg(long)] gamma: f64,
    #[arg(long)] theta: f64,
    #[arg(long = "C")] #[serde(rename = "C")] big_c: f64,
    /// `auto` or a bit count.
    #[arg(long)] precision: String,
    #[arg(long)] threads: usize,
    #[arg(long)] seed: u64,
    #[arg(long)] out: PathBuf,
    /// csv or json.
    #[arg(long)] format: String,
    /// Use floor phases alpha_j floor G(n + h_j).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")] floor: bool,
    /// Frequency vector for `weyl`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] k: Vec<i64>,
    /// Common alpha multiplying floor phases (`weyl`, `zeroentropy --seq b`).
    #[arg(long, allow_hyphen_values = true)] floor_alpha: String,
    #[arg(long)] kmax: i64,
    #[arg(long, value_delimiter = ',')] moduli: Vec<u64>,
    /// Points materialized for discrepancy series.
    #[arg(long)] points: u64,
    /// growth, rotation or zero (`equi`).
    #[arg(long)] source: String,
    /// a, b, rotation, iid or constant.
    #[arg(long)] seq: String,
    #[arg(long, allow_hyphen_values = true)] alpha: String,
    #[arg(long, allow_hyphen_values = true)] beta: String,
    /// Rotation vectors, `;` between transformations, `,` within.
    #[arg(long, allow_hyphen_values = true)] betas: String,
    /// Character frequencies, `;` between characters, `,` within.
    #[arg(long, allow_hyphen_values = true)] freq: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)] x0: Vec<String>,
    /// rotation or skew (`zeroentropy`).
    #[arg(long)] system: String,
    /// Character e(m y) for `skewdemo`.
    #[arg(long, allow_hyphen_values = true)] m: i64,
    #[arg(long = "H")] #[serde(rename = "H")] h: i64,
    #[arg(long = "E")] #[serde(rename = "E")] e: i64,
    #[arg(long)] density: usize,
    #[arg(long)] s_max: u32,
    #[arg(long = "A", allow_hyphen_values = true)] #[serde(rename = "A")] a: f64,
    #[arg(long)] count: usize,
    #[arg(long)] threshold: f64,
    #[arg(long)] dstar_threshold: f64,
    #[arg(long)] tolerance: f64,
    #[arg(long)] cap: usize,
    /// `proof` (K) or `statement` (C) for the alpha range of `certify`.
    #[arg(long)] preset: String,
    /// Use log^(gamma-1) N in the upper end of the admissible orders.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")] gamma_variant: bool,
    #[arg(long)] input: PathBuf,
    /// Write 0 for wall_ms so outputs are byte-stable.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")] no_timing: bool,
}

/// Result of a subcommand before it is written out.
pub struct Outcome {
    pub body: String,
    /// Extra files `(path suffix, contents)` written next to `--out`.
    pub extra: Vec<(String, String)>,
    pub summary: String,
    pub passed: bool,
}

/// Flags over the `--config` document, if any.
pub fn resolve(cfg: &ExperimentConfig) -> Result<ExperimentConfig> {
    let Some(path) = &cfg.config else {
        return Ok(cfg.clone());
    };
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let doc = match v.get("config") {
        Some(inner) if inner.is_object() => inner.clone(),
        _ => v,
    };
    let base: ExperimentConfig = serde_json::from_value(doc)?;
    Ok(cfg.clone().over(base))
}

fn emit(cfg: &ExperimentConfig, out: &Outcome) -> Result<()> {
    match &cfg.out {
        Some(p) => {
            atomic_write(p, out.body.as_bytes())?;
            for (suffix, text) in &out.extra {
                let mut q = p.clone().into_os_string();
                q.push(suffix);
                atomic_write(&PathBuf::from(q), text.as_bytes())?;
            }
        }
        None => {
            print!("{}", out.body);
            for (suffix, text) in &out.extra {
                println!("# {suffix}");
                print!("{text}");
            }
        }
    }
    Ok(())
}

/// Run subcommand `name` on an already-built configuration, writing
/// nothing; used by the C interface.
pub fn execute(name: &str, cfg: ExperimentConfig) -> Result<Outcome> {
    let cmd = Command::from_name(name, cfg)?;
    let cfg = resolve(cmd.config())?;
    commands::dispatch(&cmd, &cfg)
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

/// Run a parsed command and return the exit code.
pub fn run(cli: Cli) -> i32 {
    let name = cli.command.name();
    let res = resolve(cli.command.config()).and_then(|cfg| {
        let out = commands::dispatch(&cli.command, &cfg)?;
        emit(&cfg, &out)?;
        Ok(out)
    });
    match res {
        Ok(out) => {
            eprintln!("intergrow {name}: {} [{}]", out.summary, if out.passed { "pass" } else { "FAIL" });
            if out.passed {
                0
            } else {
                2
            }
        }
        Err(e) => {
            println!("{}", error_json(&e));
            eprintln!("intergrow {name}: {e}");
            1
        }
    }
}

/// Parse `std::env::args` and run.
pub fn main_exit() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = Error::Input(e.to_string().lines().next().unwrap_or("bad arguments").to_string());
            println!("{}", error_json(&err));
            let _ = e.print();
            1
        }
    }
}
