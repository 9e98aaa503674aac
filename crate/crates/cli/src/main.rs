//! Command-line front end: build states to files, run check/lemma suites,
//! emit key-rate CSV curves, and run Bell optimization.
//!
//! Exit codes: 0 success, 1 argument/validation error, 2 numerical
//! assertion failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pditlab_core::keyrates::{key_curve, CurveFamily};
use pditlab_core::protocol::KeepRule;
use pditlab_core::{bell, eig, io, lemmas, states, twist};

#[derive(Parser)]
#[command(
    name = "pditlab",
    about = "Multipartite private states, bound entangled families and key-rate bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// PSD / positivity tolerance used by the checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Restart count for the optimizers.
    #[arg(long, global = true, default_value_t = 50)]
    restarts: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    One,
    Two,
    Ghz,
    Smolin,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitaryKind {
    Vandermonde,
    Hadamard,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    AllEqual,
    AllZeros,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteName {
    A1,
    A2,
    V1,
    V2,
    V3,
    V4,
    Ppt,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state and write it to a JSON file.
    Construct(ConstructArgs),
    /// Validate a state file: positivity, partial transposes, closeness.
    Check(CheckArgs),
    /// Emit the key-rate curve of a family over a copy range as CSV.
    Distill(DistillArgs),
    /// Emit the full set of figure-analogue CSV files.
    Figures(FiguresArgs),
    /// Optimize the correlation Bell value of a Smolin-family state.
    Bell(BellArgs),
    /// Run a lemma verification suite and emit its report.
    Lemmas(LemmasArgs),
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Shield dimension per party (families one/two).
    #[arg(long = "D")]
    shield_dim: Option<usize>,
    /// Number of parties.
    #[arg(long = "N")]
    parties: Option<usize>,
    /// Seed unitary for family two.
    #[arg(long, value_enum)]
    unitary: Option<UnitaryKind>,
    /// Key dimension for ghz.
    #[arg(long)]
    d: Option<usize>,
    /// Smolin-family index (2n qubits).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Assert a PSD spectrum.
    #[arg(long)]
    psd: bool,
    /// Assert PSD single-party partial transposes.
    #[arg(long)]
    ppt: bool,
    /// Extract the closeness certificate (block-operator files only).
    #[arg(long)]
    closeness: bool,
    /// All-equal key row used by the closeness certificate.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Write the collected reports to a JSON file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct DistillArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long = "D")]
    shield_dim: usize,
    #[arg(long = "N")]
    parties: usize,
    #[arg(long, value_enum)]
    unitary: Option<UnitaryKind>,
    /// Post-selection rule override for family two.
    #[arg(long, value_enum)]
    rule: Option<Rule>,
    #[arg(long, default_value_t = 1)]
    k_min: u32,
    #[arg(long)]
    k_max: u32,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args)]
struct FiguresArgs {
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BellArgs {
    /// Smolin-family index (2n qubits).
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmasArgs {
    #[arg(long, value_enum)]
    suite: SuiteName,
    #[arg(long = "D")]
    shield_dim: Option<usize>,
    #[arg(long = "N")]
    parties: Option<usize>,
    #[arg(long, value_enum)]
    unitary: Option<UnitaryKind>,
    /// Trial count for the randomized block-positivity suite.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// State file for the ppt suite / matrix file for the a2 scan.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Row index for the a2 scan.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Row tolerance for the a2 scan.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Validation failure (exit 1) vs numerical assertion failure (exit 2).
enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<pditlab_core::Error> for Failure {
    fn from(e: pditlab_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Construct(args) => construct(args),
        Command::Check(args) => check(args, cli.tol),
        Command::Distill(args) => distill(args),
        Command::Figures(args) => figures(args),
        Command::Bell(args) => bell_cmd(args, cli.restarts, cli.seed),
        Command::Lemmas(args) => lemmas_cmd(args, cli.seed),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("missing required flag {flag}")))
}

fn seed_unitary(kind: UnitaryKind, d: usize) -> Result<states::SeedUnitary, Failure> {
    match kind {
        UnitaryKind::Vandermonde => Ok(states::vandermonde_seed(d)?),
        UnitaryKind::Hadamard => {
            if !d.is_power_of_two() || d < 2 {
                return Err(Failure::Usage(format!(
                    "--unitary hadamard needs a power-of-two --D (got {d})"
                )));
            }
            Ok(states::hadamard_power_seed(d.trailing_zeros())?)
        }
    }
}

fn construct(args: &ConstructArgs) -> Result<(), Failure> {
    let text = match args.family {
        Family::One => {
            let d = require(args.shield_dim, "--D")?;
            let n = require(args.parties, "--N")?;
            io::block_operator_to_json(&states::construction_one(d, n)?)
        }
        Family::Two => {
            let d = require(args.shield_dim, "--D")?;
            let n = require(args.parties, "--N")?;
            let kind = require(args.unitary, "--unitary")?;
            let seed = seed_unitary(kind, d)?;
            io::block_operator_to_json(&states::construction_two(&seed, n)?)
        }
        Family::Ghz => {
            let d = require(args.d, "--d")?;
            let n = require(args.parties, "--N")?;
            io::matrix_to_json(&states::ghz(d, n)?)
        }
        Family::Smolin => {
            let n = require(args.n, "--n")?;
            io::matrix_to_json(&states::smolin_family(n)?)
        }
    };
    fs::write(&args.out, text)?;
    Ok(())
}

fn check(args: &CheckArgs, tol: f64) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)?;
    let block = io::looks_like_block_operator(&text);
    let (dense, operator) = if block {
        let op = io::block_operator_from_json(&text)?;
        (op.assemble(), Some(op))
    } else {
        (io::matrix_from_json(&text)?, None)
    };

    let mut report = String::from("{");
    let mut failed: Vec<String> = Vec::new();

    if args.psd {
        let eigs = eig::herm_eigenvalues(&dense).map_err(|e| Failure::Numeric(e.to_string()))?;
        let min = eigs.last().copied().unwrap_or(0.0);
        let scale = eigs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let pass = min >= -tol * scale;
        report.push_str(&format!(
            "\"psd\":{{\"min_eigenvalue\":{},\"pass\":{}}},",
            io::fmt_f64(min),
            pass
        ));
        if !pass {
            failed.push(format!("psd check failed: min eigenvalue {min:.3e}"));
        }
    }
    if args.ppt {
        let suite = lemmas::ppt_suite(&dense).map_err(|e| Failure::Numeric(e.to_string()))?;
        report.push_str(&format!("\"ppt\":{},", trim_line(&io::lemma_report_to_json(&suite))));
        if !suite.pass {
            failed.push(format!(
                "ppt check failed: worst partial-transpose eigenvalue {:.3e}",
                suite.worst_margin()
            ));
        }
    }
    if args.closeness {
        let op = operator.as_ref().ok_or_else(|| {
            Failure::Usage("--closeness needs a block-operator file".to_string())
        })?;
        let closeness = twist::closeness_report(op, args.row)
            .map_err(|e| Failure::Numeric(e.to_string()))?;
        report.push_str(&format!(
            "\"closeness\":{},",
            trim_line(&io::closeness_report_to_json(&closeness))
        ));
    }
    if report.ends_with(',') {
        report.pop();
    }
    report.push_str("}\n");

    print!("{report}");
    if let Some(path) = &args.report {
        fs::write(path, &report)?;
    }
    if let Some(first) = failed.into_iter().next() {
        return Err(Failure::Numeric(first));
    }
    Ok(())
}

fn trim_line(s: &str) -> String {
    s.trim_end().to_string()
}

fn distill(args: &DistillArgs) -> Result<(), Failure> {
    if args.k_min < 1 || args.k_max < args.k_min {
        return Err(Failure::Usage(format!(
            "bad copy range --k-min {} --k-max {}",
            args.k_min, args.k_max
        )));
    }
    let points = match args.family {
        Family::One => key_curve(
            &CurveFamily::One { shield_dim: args.shield_dim, parties: args.parties },
            args.k_min..=args.k_max,
        )?,
        Family::Two => {
            let kind = require(args.unitary, "--unitary")?;
            let seed = seed_unitary(kind, args.shield_dim)?;
            let rule = match args.rule {
                Some(Rule::AllEqual) => KeepRule::AllEqual,
                Some(Rule::AllZeros) => KeepRule::AllZeros,
                None => {
                    if seed.hermitian {
                        KeepRule::AllEqual
                    } else {
                        KeepRule::AllZeros
                    }
                }
            };
            key_curve(
                &CurveFamily::Two { seed: &seed, parties: args.parties, rule },
                args.k_min..=args.k_max,
            )?
        }
        _ => return Err(Failure::Usage("distill supports --family one|two".to_string())),
    };
    fs::write(&args.csv, io::curve_to_csv(&points))?;
    Ok(())
}

fn figures(args: &FiguresArgs) -> Result<(), Failure> {
    fs::create_dir_all(&args.out_dir)?;
    let write = |name: &str, content: String| -> Result<(), Failure> {
        fs::write(Path::new(&args.out_dir).join(name), content)?;
        Ok(())
    };

    // Unscaled and scaled key-rate surfaces of family one over the same
    // (k, D) grid at N = 3 and N = 2.
    for (name_key, name_scaled, parties) in
        [("fig1a.csv", "fig2a.csv", 3usize), ("fig1b.csv", "fig2b.csv", 2usize)]
    {
        let mut points = Vec::new();
        for d in [2usize, 3, 4, 5] {
            points.extend(key_curve(&CurveFamily::One { shield_dim: d, parties }, 1..=60)?);
        }
        let csv = io::curve_to_csv(&points);
        write(name_key, csv.clone())?;
        write(name_scaled, csv)?;
    }

    // Family two rate surface (seed phases do not enter the closed forms).
    let mut points = Vec::new();
    for d in [2usize, 3, 4] {
        let seed = states::vandermonde_seed(d)?;
        let rule = if seed.hermitian { KeepRule::AllEqual } else { KeepRule::AllZeros };
        points.extend(key_curve(&CurveFamily::Two { seed: &seed, parties: 3, rule }, 1..=40)?);
    }
    write("fig3.csv", io::curve_to_csv(&points))?;

    // Scaled bounds: the two-sided probability model needs Hermitian seeds
    // (D a power of two); the one-sided model runs on any flat seed.
    let mut points = Vec::new();
    for m in [1u32, 2] {
        let seed = states::hadamard_power_seed(m)?;
        points.extend(key_curve(
            &CurveFamily::Two { seed: &seed, parties: 3, rule: KeepRule::AllEqual },
            1..=40,
        )?);
    }
    write("fig4a.csv", io::curve_to_csv(&points))?;

    let mut points = Vec::new();
    for d in [2usize, 3, 4] {
        let seed = states::vandermonde_seed(d)?;
        points.extend(key_curve(
            &CurveFamily::Two { seed: &seed, parties: 3, rule: KeepRule::AllZeros },
            1..=40,
        )?);
    }
    write("fig4b.csv", io::curve_to_csv(&points))?;
    Ok(())
}

fn bell_cmd(args: &BellArgs, restarts: usize, seed: u64) -> Result<(), Failure> {
    let rho = states::smolin_family(args.n)?;
    let (value, settings) =
        bell::bell_optimize(&rho, restarts, seed).map_err(|e| Failure::Numeric(e.to_string()))?;
    let text = io::bell_result_to_json(value, &settings);
    print!("{text}");
    if let Some(path) = &args.out {
        fs::write(path, &text)?;
    }
    Ok(())
}

fn lemmas_cmd(args: &LemmasArgs, seed: u64) -> Result<(), Failure> {
    let report = match args.suite {
        SuiteName::A1 => lemmas::lemma_a1_suite(args.trials, seed)?,
        SuiteName::A2 => {
            let path = require(args.input.clone(), "--in")?;
            let matrix = io::matrix_from_json(&fs::read_to_string(path)?)?;
            let scan = lemmas::lemma_a2_scan(&matrix, args.row, args.eps)
                .map_err(|e| Failure::Numeric(e.to_string()))?;
            let pass = scan.lower_margins.iter().chain(&scan.upper_margins).all(|&m| m >= -1e-10);
            let text = format!(
                "{{\"eta_observed\":{},\"lower_margins\":{},\"upper_margins\":{},\"pass\":{}}}\n",
                io::fmt_f64(scan.eta_observed),
                fmt_list(&scan.lower_margins),
                fmt_list(&scan.upper_margins),
                pass,
            );
            print!("{text}");
            if let Some(path) = &args.report {
                fs::write(path, &text)?;
            }
            if !pass {
                return Err(Failure::Numeric("diagonal margins violated".to_string()));
            }
            return Ok(());
        }
        SuiteName::V1 | SuiteName::V2 | SuiteName::V3 | SuiteName::V4 => {
            let d = require(args.shield_dim, "--D")?;
            let n = require(args.parties, "--N")?;
            let which = match args.suite {
                SuiteName::V1 => lemmas::LemmaV::V1,
                SuiteName::V2 => lemmas::LemmaV::V2,
                SuiteName::V3 => lemmas::LemmaV::V3,
                _ => lemmas::LemmaV::V4,
            };
            let seed_u = match args.suite {
                SuiteName::V4 => {
                    let kind = args.unitary.unwrap_or(UnitaryKind::Vandermonde);
                    Some(seed_unitary(kind, d)?)
                }
                _ => None,
            };
            lemmas::lemma_v_suite(which, d, n, seed_u.as_ref())?
        }
        SuiteName::Ppt => {
            let path = require(args.input.clone(), "--in")?;
            let text = fs::read_to_string(path)?;
            let dense = if io::looks_like_block_operator(&text) {
                io::block_operator_from_json(&text)?.assemble()
            } else {
                io::matrix_from_json(&text)?
            };
            lemmas::ppt_suite(&dense).map_err(|e| Failure::Numeric(e.to_string()))?
        }
    };
    let text = io::lemma_report_to_json(&report);
    print!("{text}");
    if let Some(path) = &args.report {
        fs::write(path, &text)?;
    }
    if !report.pass {
        return Err(Failure::Numeric(format!(
            "suite {} failed (worst margin {:.3e})",
            report.suite,
            report.worst_margin()
        )));
    }
    Ok(())
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| io::fmt_f64(v)).collect();
    format!("[{}]", parts.join(","))
}
