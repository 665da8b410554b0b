use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fraclap::report::{Report, Table};
use fraclap::suites::{run_suite, SuiteOptions};
use fraclap::FracParams;

#[derive(Parser, Debug)]
#[command(name = "fraclap", version, about = "Verification suites for the fractional Laplacian toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and write report.json plus CSV tables.
    Suite(SuiteArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteName {
    Operator,
    Kernels,
    Liouville,
    Equivalence,
    All,
}

impl SuiteName {
    fn as_str(self) -> &'static str {
        match self {
            Self::Operator => "operator",
            Self::Kernels => "kernels",
            Self::Liouville => "liouville",
            Self::Equivalence => "equivalence",
            Self::All => "all",
        }
    }
}

#[derive(clap::Args, Debug)]
struct SuiteArgs {
    name: SuiteName,
    /// Dimension.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    n: u8,
    #[arg(long, default_value_t = 1.0, value_parser = parse_alpha)]
    alpha: f64,
    /// Spectral grid points per axis [default: 256, or 128 for n = 3].
    #[arg(long)]
    grid: Option<usize>,
    /// Half-width of the spectral box.
    #[arg(long = "box", default_value_t = 12.0)]
    half_width: f64,
    /// Relative tolerance of the PV quadrature.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value = "./fraclap-out")]
    out: PathBuf,
    /// Also print the CSV tables to stdout.
    #[arg(long)]
    csv: bool,
    /// Seed for sampled test points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if a > 0.0 && a < 2.0 {
        Ok(a)
    } else {
        Err("alpha must lie in (0,2)".into())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn number(v: f64) -> String {
    if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn table_csv(t: &Table) -> Result<Vec<u8>, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|v| number(*v)))?;
    }
    Ok(w.into_inner()?)
}

fn emit(report: &Report, args: &SuiteArgs) -> Result<(), Box<dyn std::error::Error>> {
    fs::create_dir_all(&args.out)?;
    for t in &report.tables {
        let bytes = table_csv(t)?;
        write_atomic(&args.out.join(format!("{}.csv", t.name)), &bytes)?;
        if args.csv {
            println!("# {}.csv", t.name);
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    let json = serde_json::to_vec_pretty(report)?;
    write_atomic(&args.out.join("report.json"), &json)?;
    Ok(())
}

fn run(args: &SuiteArgs) -> Result<bool, Box<dyn std::error::Error>> {
    let params = FracParams::new(args.n as usize, args.alpha)?;
    let opts = SuiteOptions {
        params,
        grid: args.grid,
        half_width: args.half_width,
        tol: args.tol,
        seed: args.seed,
    };
    opts.validate()?;
    let report = run_suite(args.name.as_str(), &opts)?;
    for c in &report.cases {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag}  {}  {} = {:.4e} (threshold {:.4e})", c.name, c.metric, c.value, c.threshold);
    }
    println!(
        "{}: {} in {:.1} s, report in {}",
        report.suite,
        if report.overall_pass() { "pass" } else { "FAIL" },
        report.wall_time_seconds.unwrap_or(0.0),
        args.out.display()
    );
    emit(&report, args)?;
    Ok(report.overall_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Suite(args) = cli.command;
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
