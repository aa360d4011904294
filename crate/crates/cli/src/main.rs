mod config;
mod error;
mod output;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use symlen_core::bounds::bound_report;
use symlen_core::builders::build_scheme;
use symlen_core::decompose::{decompose, LinkageIndex, PfisterSum};
use symlen_core::milnor::{SymbolAlgebra, SymbolVector};
use symlen_core::scheme::{Class, ClassSet, InvariantProfile, Scheme, SquareClassGroup, ValueSetTable};
use symlen_core::verify::{run_verification, VerifyConfig};

use config::{CommonArgs, RunConfig};
use error::{CliError, EXIT_VERIFY};

#[derive(Parser)]
#[command(name = "symlen", version, about = "Symbol lengths and their bounds for finite quadratic form schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scheme and print its value-set table.
    Build {
        /// Also write the table in the format read by --unsafe-table.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Print the invariant profile.
    Invariants,
    /// Compute dim k_n and the symbol length with a witness.
    Sl,
    /// Evaluate every bound against the exact symbol length.
    Bounds,
    /// Rewrite a sum of Pfister forms and certify the result.
    Decompose {
        /// Slot tuples of coordinate bitstrings, e.g. "110,001;010,001".
        #[arg(long)]
        form: String,
        /// Skip merging linked pairs.
        #[arg(long)]
        no_merge: bool,
    },
    /// Run every verification check; exits 3 if any fails.
    #[command(alias = "verify-paper")]
    Verify,
}

fn bits(c: Class, dim: usize) -> String {
    format!("{:0width$b}", c.0, width = dim.max(1))
}

fn table_text(s: &Scheme) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# rows: class, then the mask of D<1,class> (bit c set iff class c is represented)");
    let _ = writeln!(out, "minus_one {}", bits(s.minus_one(), s.dim()));
    for (a, set) in s.values().table.iter().enumerate() {
        let _ = writeln!(out, "{} {:0width$b}", bits(Class(a as u32), s.dim()), set.0, width = s.order());
    }
    out
}

fn parse_table(path: &Path) -> Result<Scheme, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let bad = |i: usize, what: &str| CliError::invalid(format!("{}:{}: {what}", path.display(), i + 1));
    let mut minus_one = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [key, value] = fields[..] else { return Err(bad(i, "expected two fields")) };
        let parsed = u64::from_str_radix(value, 2).map_err(|_| bad(i, "expected a bitstring"))?;
        if key == "minus_one" {
            minus_one = Some(Class(parsed as u32));
        } else {
            let class = u32::from_str_radix(key, 2).map_err(|_| bad(i, "expected a class bitstring"))?;
            if class as usize != rows.len() {
                return Err(bad(i, "rows must list the classes in order"));
            }
            rows.push(ClassSet(parsed));
        }
    }
    if !rows.len().is_power_of_two() {
        return Err(CliError::invalid(format!("{}: {} rows is not a power of two", path.display(), rows.len())));
    }
    let dim = rows.len().trailing_zeros() as usize;
    if dim > symlen_core::scheme::MAX_SCHEME_DIM {
        return Err(CliError::cap(format!("table dimension {dim} exceeds {}", symlen_core::scheme::MAX_SCHEME_DIM)));
    }
    let minus_one = minus_one.ok_or_else(|| CliError::invalid(format!("{}: missing minus_one", path.display())))?;
    if minus_one.0 as usize >= rows.len() || rows.iter().any(|r| r.0 >> rows.len() != 0) {
        return Err(CliError::invalid(format!("{}: class outside the group", path.display())));
    }
    Ok(Scheme::new(format!("table({})", path.display()), SquareClassGroup { dim, minus_one }, ValueSetTable { table: rows })?)
}

fn load_scheme(config: &RunConfig) -> Result<Scheme, CliError> {
    match (&config.unsafe_table, &config.scheme) {
        (Some(path), _) => parse_table(path),
        (None, Some(text)) => Ok(build_scheme(text)?),
        (None, None) => Err(CliError::invalid("--scheme or --unsafe-table is required")),
    }
}

fn algebra(s: &Scheme, n: usize, config: &RunConfig) -> Result<SymbolAlgebra, CliError> {
    Ok(SymbolAlgebra::new(s, n, config.cap_kn)?)
}

fn exact_section(s: &Scheme, a: &SymbolAlgebra, config: &RunConfig) -> Result<Value, CliError> {
    let (sl, witness) = a.sl_field(config.cap_bfs)?;
    let layers = a.layer_sizes(config.cap_bfs)?;
    let slots: Vec<Vec<String>> = a.decompose(witness).iter().map(|e| e.iter().map(|c| bits(*c, s.dim())).collect()).collect();
    Ok(json!({
        "quantity": "symbol length in k_n",
        "dim_kn": a.dim(),
        "sl": sl,
        "witness": slots,
        "witness_vector": format!("{:0width$b}", witness.0, width = a.dim().max(1)),
        "layer_sizes": layers,
    }))
}

fn cmd_build(config: &RunConfig, output: Option<&Path>) -> Result<Value, CliError> {
    let s = load_scheme(config)?;
    if let Some(path) = output {
        fs::write(path, table_text(&s)).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    }
    let rows: Vec<Value> = s
        .values()
        .table
        .iter()
        .enumerate()
        .map(|(a, set)| json!({ "class": bits(Class(a as u32), s.dim()), "values": set.iter().map(|c| bits(c, s.dim())).collect::<Vec<_>>() }))
        .collect();
    Ok(json!({ "scheme": s.name(), "dim": s.dim(), "order": s.order(), "minus_one": bits(s.minus_one(), s.dim()), "table": rows }))
}

fn profile(s: &Scheme) -> Result<InvariantProfile, CliError> {
    Ok(s.invariants()?)
}

fn cmd_invariants(config: &RunConfig) -> Result<Value, CliError> {
    let s = load_scheme(config)?;
    let p = profile(&s)?;
    Ok(json!({ "scheme": s.name(), "profile": p, "bound_exponent": p.bound_exponent() }))
}

fn cmd_sl(config: &RunConfig) -> Result<Value, CliError> {
    let n = config.degree()?;
    let s = load_scheme(config)?;
    let a = algebra(&s, n, config)?;
    Ok(json!({ "scheme": s.name(), "n": n, "exact": exact_section(&s, &a, config)? }))
}

fn cmd_bounds(config: &RunConfig) -> Result<Value, CliError> {
    let n = config.degree()?;
    let s = load_scheme(config)?;
    let p = profile(&s)?;
    let exact = algebra(&s, n, config).and_then(|a| exact_section(&s, &a, config));
    let mut notes = Vec::new();
    let exact = match exact {
        Ok(v) => v,
        Err(e) if e.code == error::EXIT_CAP => {
            notes.push(format!("exact symbol length skipped: {e}"));
            Value::Null
        }
        Err(e) => return Err(e),
    };
    let strata = match s.enumerate_pfister_strata(n, config.cap_enum) {
        Ok(st) => Some(st),
        Err(e) => {
            notes.push(format!("Pfister strata skipped: {e}"));
            None
        }
    };
    let sl = exact.get("sl").and_then(Value::as_u64).map(|x| x as usize);
    let report = bound_report(s.name(), &p, n, strata.as_ref(), sl);
    let violations: Vec<&str> = report.violations().iter().map(|r| r.id.as_str()).collect();
    Ok(json!({
        "scheme": s.name(),
        "n": n,
        "profile": p,
        "bounds": report.rows,
        "exact": exact,
        "strata": strata,
        "dominance": if sl.is_none() { Value::Null } else { json!(violations.is_empty()) },
        "violations": violations,
        "notes": notes,
        "certificates": [],
    }))
}

fn cmd_decompose(config: &RunConfig, form: &str, merge: bool) -> Result<Value, CliError> {
    let s = load_scheme(config)?;
    let input = PfisterSum::parse(form, s.dim())?;
    if let Some(n) = config.n {
        if n != input.n {
            return Err(CliError::invalid(format!("form has degree {}, --n is {n}", input.n)));
        }
    }
    if input.n < 2 {
        return Err(CliError::invalid("forms must have degree at least 2"));
    }
    let p = profile(&s)?;
    let a = algebra(&s, input.n, config)?;
    let index = if merge { Some(LinkageIndex::build(&s, input.n, config.cap_enum)?) } else { None };
    let run = decompose(&s, &p, &a, index.as_ref(), &input)?;
    let residue = input.entries.iter().try_fold(SymbolVector(0), |acc, e| a.symbol_image(&e.form()).map(|v| acc + v))?;
    let mut certificates = vec![json!({ "stage": "rewrite", "certificate": run.rewritten })];
    if let Some(m) = &run.merged {
        certificates.push(json!({ "stage": "merge", "certificate": m }));
    }
    let pass = run.rewritten.pass && run.merged.as_ref().map_or(true, |m| m.pass);
    Ok(json!({
        "scheme": s.name(),
        "n": input.n,
        "input": input.format_slots(),
        "residue": format!("{:0width$b}", residue.0, width = a.dim().max(1)),
        "rewritten_length": run.rewritten_length,
        "merged_length": run.merged_length,
        "pass": pass,
        "certificates": certificates,
    }))
}

fn cmd_verify(config: &RunConfig) -> (Value, bool) {
    let vc = VerifyConfig { max_d: config.max_d, seed: config.seed, samples: config.samples, enum_cap: config.cap_enum, bfs_cap: config.cap_bfs };
    let report = run_verification(&vc);
    let pass = report.pass;
    (serde_json::to_value(&report).expect("report serializes"), pass)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let config = RunConfig::resolve(cli.common)?;
    let (doc, code) = match &cli.command {
        Command::Build { output } => (cmd_build(&config, output.as_deref())?, 0),
        Command::Invariants => (cmd_invariants(&config)?, 0),
        Command::Sl => (cmd_sl(&config)?, 0),
        Command::Bounds => (cmd_bounds(&config)?, 0),
        Command::Decompose { form, no_merge } => {
            let doc = cmd_decompose(&config, form, !no_merge)?;
            let code = if doc["pass"] == json!(true) { 0 } else { EXIT_VERIFY };
            (doc, code)
        }
        Command::Verify => {
            let (doc, pass) = cmd_verify(&config);
            (doc, if pass { 0 } else { EXIT_VERIFY })
        }
    };
    print!("{}", output::render(&doc, config.format)?);
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_INVALID as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
