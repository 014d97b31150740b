//! Command-line front end for the curvecount engine.
//!
//! Exit status: 0 on success, 1 on usage/parse/schema errors, 2 when a
//! self-test or consistency check fails.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use curvecount::contact::{ContactMultiIndex, MAX_CONTACT_ORDER};
use curvecount::elliptic::EllipticRun;
use curvecount::selftest;
use curvecount::severi::{kontsevich, SeveriKey, SeveriTable};
use curvecount::sumformula::{
    invert_smatrix, sum_formula, table_from_json_str, table_to_json_string, RelInvTable, SMatrix,
    Truncation,
};

#[derive(Parser)]
#[command(
    name = "curvecount",
    about = "Exact curve counts: Severi degrees, Kontsevich numbers, elliptic-surface series, and relative-invariant convolution",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Tables of generalized Severi degrees N^{d,delta}(alpha, beta).
    Severi(SeveriArgs),
    /// Counts of irreducible delta-nodal curves, from the Severi table.
    Irreducible(IrreducibleArgs),
    /// The Kontsevich numbers N_d of rational plane curves.
    Kontsevich(KontsevichArgs),
    /// F0 and H coefficients of the rational elliptic surface, with
    /// consistency verdicts.
    Elliptic(EllipticArgs),
    /// Convolve relative-invariant tables: X.json [S.json] Y.json.
    Convolve(ConvolveArgs),
    /// Run the full invariant suite.
    Selftest,
}

#[derive(Args)]
struct SeveriArgs {
    /// Largest curve degree d. When --alpha/--beta fix the degree this
    /// must be absent or agree with the inferred value.
    #[arg(long)]
    max_degree: Option<u32>,
    /// Largest node count delta.
    #[arg(long, default_value_t = 0)]
    max_delta: u32,
    /// Fixed contacts as sparse JSON pairs, e.g. [[1,2],[3,1]].
    #[arg(long)]
    alpha: Option<String>,
    /// Moving contacts as sparse JSON pairs.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct IrreducibleArgs {
    #[arg(long, default_value_t = 4)]
    max_degree: u32,
    #[arg(long, default_value_t = 0)]
    max_delta: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct KontsevichArgs {
    #[arg(long, default_value_t = 5)]
    max_degree: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EllipticArgs {
    /// Truncation order in the fiber variable t.
    #[arg(long, default_value_t = 16)]
    order: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ConvolveArgs {
    /// Two paths (X, Y) or three (X, S, Y); the middle table is the
    /// S-matrix remainder, applied as supplied unless --invert-s is set.
    #[arg(required = true)]
    inputs: Vec<String>,
    /// Invert the middle S-matrix before contracting.
    #[arg(long, default_value_t = false)]
    invert_s: bool,
    /// Truncation: largest total class degree kept.
    #[arg(long, default_value_t = 32)]
    max_class_deg: u32,
    /// Truncation: smallest euler characteristic kept.
    #[arg(long, default_value_t = -64, allow_negative_numbers = true)]
    min_chi: i64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<curvecount::Error> for Failure {
    fn from(e: curvecount::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successful exits
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Severi(args) => run_severi(args),
        Command::Irreducible(args) => run_irreducible(args),
        Command::Kontsevich(args) => run_kontsevich(args),
        Command::Elliptic(args) => run_elliptic(args),
        Command::Convolve(args) => run_convolve(args),
        Command::Selftest => run_selftest(),
    };
    match result {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_pairs(text: &str, what: &str) -> Result<ContactMultiIndex, Failure> {
    let pairs: Vec<(u32, u32)> = serde_json::from_str(text)
        .map_err(|e| Failure::usage(format!("cannot parse {what} as [[k,count],...]: {e}")))?;
    ContactMultiIndex::from_pairs(&pairs, Some(MAX_CONTACT_ORDER)).map_err(Into::into)
}

fn pairs_string(index: &ContactMultiIndex) -> String {
    // CSV-safe sparse form: k:count pairs joined by ';'
    index
        .to_pairs()
        .iter()
        .map(|(k, c)| format!("{k}:{c}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn pairs_json(index: &ContactMultiIndex) -> serde_json::Value {
    serde_json::Value::Array(
        index
            .to_pairs()
            .iter()
            .map(|&(k, c)| serde_json::json!([k, c]))
            .collect(),
    )
}

fn run_severi(args: SeveriArgs) -> Result<String, Failure> {
    let table = SeveriTable::new();
    let mut rows = Vec::new();

    let profiles: Vec<(u32, ContactMultiIndex, ContactMultiIndex)> = match (&args.alpha, &args.beta)
    {
        (None, None) => (1..=args.max_degree.unwrap_or(4))
            .map(|d| {
                (
                    d,
                    ContactMultiIndex::zero(),
                    ContactMultiIndex::transverse(d),
                )
            })
            .collect(),
        (alpha, beta) => {
            let alpha = alpha
                .as_deref()
                .map(|t| parse_pairs(t, "--alpha"))
                .transpose()?
                .unwrap_or_else(ContactMultiIndex::zero);
            let beta = beta
                .as_deref()
                .map(|t| parse_pairs(t, "--beta"))
                .transpose()?
                .unwrap_or_else(ContactMultiIndex::zero);
            let d = alpha.total_order() + beta.total_order();
            if d == 0 {
                return Err(Failure::usage(
                    "the contact profile must have positive total order",
                ));
            }
            if let Some(given) = args.max_degree {
                if given as u64 != d {
                    return Err(Failure::usage(format!(
                            "--max-degree {given} conflicts with the contact profile of total order {d}"
                        )));
                }
            }
            vec![(d as u32, alpha, beta)]
        }
    };

    for (d, alpha, beta) in profiles {
        let cap = SeveriKey::delta_cap(d);
        for delta in 0..=args.max_delta.min(cap) {
            let key = SeveriKey::new(d, delta, alpha.clone(), beta.clone())?;
            let r = key.point_conditions();
            if r < 0 {
                continue;
            }
            let value = table.severi(&key)?;
            rows.push((d, delta, alpha.clone(), beta.clone(), r, value));
        }
    }

    match args.format {
        Format::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|(d, delta, alpha, beta, r, value)| {
                    serde_json::json!({
                        "d": d,
                        "delta": delta,
                        "alpha": pairs_json(alpha),
                        "beta": pairs_json(beta),
                        "points": r,
                        "value": value.to_string(),
                    })
                })
                .collect();
            Ok(pretty(&serde_json::json!({
                "command": "severi",
                "entries": entries,
            })))
        }
        Format::Csv => {
            let mut out = String::from("d,delta,alpha,beta,points,value\n");
            for (d, delta, alpha, beta, r, value) in rows {
                let _ = writeln!(
                    out,
                    "{d},{delta},{},{},{r},{value}",
                    pairs_string(&alpha),
                    pairs_string(&beta)
                );
            }
            Ok(out.trim_end().to_string())
        }
    }
}

fn run_irreducible(args: IrreducibleArgs) -> Result<String, Failure> {
    let table = SeveriTable::new();
    let mut rows = Vec::new();
    for d in 1..=args.max_degree {
        let cap = (d as i64) * (d as i64 + 3) / 2;
        for delta in 0..=args.max_delta {
            if (delta as i64) > cap {
                break;
            }
            let value = table.connected_from_severi(d, delta)?;
            rows.push((d, delta, cap - delta as i64, value));
        }
    }
    match args.format {
        Format::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|(d, delta, r, value)| {
                    serde_json::json!({
                        "d": d,
                        "delta": delta,
                        "points": r,
                        "value": value.to_string(),
                    })
                })
                .collect();
            Ok(pretty(&serde_json::json!({
                "command": "irreducible",
                "entries": entries,
            })))
        }
        Format::Csv => {
            let mut out = String::from("d,delta,points,value\n");
            for (d, delta, r, value) in rows {
                let _ = writeln!(out, "{d},{delta},{r},{value}");
            }
            Ok(out.trim_end().to_string())
        }
    }
}

fn run_kontsevich(args: KontsevichArgs) -> Result<String, Failure> {
    if args.max_degree == 0 {
        return Err(Failure::usage("--max-degree must be at least 1"));
    }
    let rows: Vec<(u32, String)> = (1..=args.max_degree)
        .map(|d| (d, kontsevich(d).to_string()))
        .collect();
    match args.format {
        Format::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|(d, value)| serde_json::json!({"d": d, "value": value}))
                .collect();
            Ok(pretty(&serde_json::json!({
                "command": "kontsevich",
                "entries": entries,
            })))
        }
        Format::Csv => {
            let mut out = String::from("d,value\n");
            for (d, value) in rows {
                let _ = writeln!(out, "{d},{value}");
            }
            Ok(out.trim_end().to_string())
        }
    }
}

fn run_elliptic(args: EllipticArgs) -> Result<String, Failure> {
    let run = EllipticRun::compute(args.order);
    let ode_ok = run.f0_consistent() && run.ode_residual_is_zero();
    let trr_ok = run.h_consistent();
    let f0: Vec<String> = (0..=args.order)
        .map(|d| run.f0_coeff(d).to_string())
        .collect();
    let h: Vec<String> = (0..=args.order)
        .map(|d| run.h_coeff(d).to_string())
        .collect();
    let output = match args.format {
        Format::Json => pretty(&serde_json::json!({
            "command": "elliptic",
            "order": args.order,
            "f0": f0,
            "h": h,
            "checks": {
                "ode_equals_product": ode_ok,
                "trr_equals_sum": trr_ok,
            },
        })),
        Format::Csv => {
            let mut out = String::from("d,f0,h\n");
            for d in 0..=args.order as usize {
                let _ = writeln!(out, "{d},{},{}", f0[d], h[d]);
            }
            let _ = writeln!(out, "# ODE==product: {}", verdict(ode_ok));
            let _ = write!(out, "# TRR==sum: {}", verdict(trr_ok));
            out
        }
    };
    if !(ode_ok && trr_ok) {
        // still print the table so the failure can be inspected
        println!("{output}");
        return Err(Failure::check("elliptic consistency checks failed"));
    }
    Ok(output)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_convolve(args: ConvolveArgs) -> Result<String, Failure> {
    if args.inputs.len() != 2 && args.inputs.len() != 3 {
        return Err(Failure::usage(
            "convolve takes two (X, Y) or three (X, S, Y) table files",
        ));
    }
    let trunc = Truncation::new(args.max_class_deg, args.min_chi);
    let mut loaded = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?;
        let parsed = table_from_json_str(&text, &trunc)
            .map_err(|e| Failure::usage(format!("{path}: {e}")))?;
        loaded.push(parsed);
    }
    let (basis, tx, _) = loaded.remove(0);
    for (other, _, _) in &loaded {
        if *other != basis {
            return Err(Failure::usage(
                "all tables in a convolution must share the basis",
            ));
        }
    }
    let (smatrix, ty) = if loaded.len() == 2 {
        let (_, remainder, includes_identity) = loaded.remove(0);
        let mut s = SMatrix::from_remainder(remainder)?;
        s.includes_identity = includes_identity;
        let (_, ty, _) = loaded.remove(0);
        (s, ty)
    } else {
        let (_, ty, _) = loaded.remove(0);
        (SMatrix::identity(tx.generators().to_vec()), ty)
    };
    let smatrix = if args.invert_s {
        invert_smatrix(&smatrix, &basis, &trunc)?
    } else {
        smatrix
    };
    let result: RelInvTable = sum_formula(&tx, &smatrix, &ty, &basis, &trunc)?;
    Ok(table_to_json_string(&basis, &result))
}

fn run_selftest() -> Result<String, Failure> {
    let mut out = String::new();
    for check in selftest::run_all() {
        match check.outcome {
            Ok(()) => {
                let _ = writeln!(out, "PASS  {}", check.name);
            }
            Err(detail) => {
                let _ = writeln!(out, "FAIL  {}: {detail}", check.name);
                print!("{out}");
                return Err(Failure::check(format!(
                    "invariant violated: {}",
                    check.name
                )));
            }
        }
    }
    let _ = write!(out, "all invariants hold");
    Ok(out)
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON serialization cannot fail")
}
