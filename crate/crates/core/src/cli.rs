//! Command-line front end. `run` returns the exit code and the text for
//! standard output so the binary stays a thin wrapper.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::catalog;
use crate::classifier::{classification_table, decide, Budget, Cell, ClassificationTable, ClosureClass, Status};
use crate::error::{Error, Result};
use crate::exterior::FloatForm;
use crate::nilmanifold::ManifoldSpec;
use crate::positivity::{invert_balanced, spectrum};
use crate::product::{construct_cell, product_spec, product_table};
use crate::report::{self, envelope, table_json, to_text};
use crate::specfile::{parse_form_file, parse_spec, print_spec};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

pub const SEED_ENV: &str = "PKAHLER_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "pkahler", version, about = "Generalized p-Kähler classification of complex nilmanifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SearchArgs {
    /// Base seed; defaults to $PKAHLER_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cutting-plane rounds per cell.
    #[arg(long, default_value_t = 50)]
    pub rounds: usize,
    /// Optimizer restarts per plane search.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

#[derive(clap::Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print the human-readable rendering instead of JSON.
    #[arg(long)]
    pub text: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and check structure equations (a file or a catalog name).
    Validate {
        spec: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print structure equations in canonical form.
    Print { spec: String },
    /// List the built-in structures.
    Catalog,
    /// Classification table, or a single cell with --p and --class.
    Classify {
        spec: String,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        class: Option<ClosureClass>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Product table, or a single diagonal construction with --j and --class.
    Product {
        left: String,
        right: String,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        class: Option<ClosureClass>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recover ω from ω^{n-1}/(n-1)! given as a form file.
    InvertBalanced {
        form: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-check every certificate and witness in a report.
    Verify { report: PathBuf },
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn input_error(e: impl std::fmt::Display) -> Self {
        Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

/// A path to a spec file when one exists, otherwise a catalog name.
pub fn load_spec(arg: &str) -> Result<ManifoldSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        parse_spec(&std::fs::read_to_string(path)?)
    } else {
        catalog::lookup(arg)
    }
}

fn seed_of(search: &SearchArgs) -> u64 {
    search.seed.or_else(|| std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok())).unwrap_or(DEFAULT_SEED)
}

fn budget_of(search: &SearchArgs) -> (u64, Budget) {
    let seed = seed_of(search);
    let mut b = Budget { rounds: search.rounds, ..Budget::default() }.with_seed(seed);
    b.optimizer.restarts = search.restarts;
    (seed, b)
}

fn search_json(search: &SearchArgs, seed: u64) -> Value {
    json!({ "seed": seed, "rounds": search.rounds, "restarts": search.restarts })
}

/// Writes to a sibling temporary file first so readers never see a partial report.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn emit(report: &Value, out: &OutputArgs, code: i32) -> Outcome {
    let json = to_text(report);
    let shown = if out.text { report["rendering"].as_str().unwrap_or("").to_string() } else { json.clone() };
    match &out.output {
        Some(path) => match write_atomic(path, &json) {
            Ok(()) => Outcome::ok(code, if out.text { shown } else { String::new() }),
            Err(e) => Outcome::input_error(e),
        },
        None => Outcome::ok(code, shown),
    }
}

fn table_code(t: &ClassificationTable) -> i32 {
    if t.cells.iter().any(|c| c.status == Status::Unknown) {
        EXIT_UNKNOWN
    } else {
        EXIT_YES
    }
}

fn cell_code(c: &Cell) -> i32 {
    match c.status {
        Status::Yes => EXIT_YES,
        Status::No => EXIT_NO,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

fn single_cell_table(spec: &ManifoldSpec, cell: Cell) -> ClassificationTable {
    ClassificationTable { name: spec.name.clone(), n: spec.n, cells: vec![cell], invariant_level_only: !spec.is_parallelizable() }
}

fn render_cell(c: &Cell) -> String {
    let status = match c.status {
        Status::Yes => "yes",
        Status::No => "no",
        Status::Unknown => "unknown",
    };
    let mut s = format!("{}: {status}\n", c.label());
    if let Some(w) = &c.witness {
        s.push_str(&format!("  form: {}\n  smallest plane value: {:.6e}\n", w.omega, w.min_value));
    }
    if let Some(cert) = &c.certificate {
        s.push_str(&format!("  T = {}\n  potential: {}\n", cert.t, cert.potential));
    }
    if let Some(r) = &c.reason {
        s.push_str(&format!("  {r}\n"));
    }
    s
}

fn float_form_json(f: &FloatForm) -> Value {
    let terms: Vec<Value> = f
        .ordered_terms()
        .into_iter()
        .filter(|(_, c)| c.norm() > 1e-14)
        .map(|((i, j), c)| {
            let one_based = |m: crate::exterior::MultiIndex| m.indices().iter().map(|k| k + 1).collect::<Vec<_>>();
            json!([one_based(i), one_based(j), c.re, c.im])
        })
        .collect();
    json!({ "n": f.n(), "terms": terms })
}

fn require_pair(p: Option<usize>, class: Option<ClosureClass>, names: (&str, &str)) -> Result<Option<(usize, ClosureClass)>> {
    match (p, class) {
        (Some(p), Some(c)) => Ok(Some((p, c))),
        (None, None) => Ok(None),
        _ => Err(Error::Parse(format!("--{} and --{} go together", names.0, names.1))),
    }
}

pub fn run(cli: Cli) -> Outcome {
    match execute(cli) {
        Ok(o) => o,
        Err(e) => Outcome::input_error(e),
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let full = std::iter::once(std::ffi::OsString::from("pkahler")).chain(args.into_iter().map(Into::into));
    match Cli::try_parse_from(full) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_YES };
            Outcome { code, stdout: if e.use_stderr() { String::new() } else { e.to_string() }, stderr: if e.use_stderr() { e.to_string() } else { String::new() } }
        }
    }
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Catalog => Ok(Outcome::ok(EXIT_YES, catalog::NAMES.iter().map(|n| format!("{n}\n")).collect())),
        Command::Print { spec } => Ok(Outcome::ok(EXIT_YES, print_spec(&load_spec(&spec)?))),
        Command::Validate { spec, out } => {
            let spec = load_spec(&spec)?;
            let v = spec.validate()?;
            let rendering = format!(
                "{}: valid, n = {}, {}\n",
                v.name,
                v.n,
                if v.holomorphically_parallelizable { "holomorphically parallelizable" } else { "not holomorphically parallelizable" }
            );
            let report = envelope("validate", DEFAULT_SEED, Some(&spec), json!({ "validation": v }), rendering);
            Ok(emit(&report, &out, EXIT_YES))
        }
        Command::Classify { spec, p, class, search, out } => {
            let spec = load_spec(&spec)?;
            spec.validate()?;
            let (seed, budget) = budget_of(&search);
            let (table, code, rendering) = match require_pair(p, class, ("p", "class"))? {
                Some((p, class)) => {
                    if p == 0 || p >= spec.n {
                        return Err(Error::OutOfRange(format!("p = {p} outside 1..{}", spec.n - 1)));
                    }
                    let cell = Cell::from_decision(decide(&spec, p, class, &budget)?);
                    let (code, r) = (cell_code(&cell), render_cell(&cell));
                    (single_cell_table(&spec, cell), code, r)
                }
                None => {
                    let t = classification_table(&spec, &budget)?;
                    let r = report::render_table(&t);
                    let code = table_code(&t);
                    (t, code, r)
                }
            };
            let body = json!({ "search": search_json(&search, seed), "table": table_json(&table) });
            Ok(emit(&envelope("classify", seed, Some(&spec), body, rendering), &out, code))
        }
        Command::Product { left, right, j, class, search, out } => {
            let (x, y) = (load_spec(&left)?, load_spec(&right)?);
            let pr = product_spec(&x, &y)?;
            let (seed, budget) = budget_of(&search);
            let factors = json!({ "left": report::spec_json(&x), "right": report::spec_json(&y) });
            let (table, code, rendering) = match require_pair(j, class, ("j", "class"))? {
                Some((j, class)) => {
                    if j == 0 || j >= pr.total() {
                        return Err(Error::OutOfRange(format!("j = {j} outside 1..{}", pr.total() - 1)));
                    }
                    match construct_cell(&pr, j, class, &budget.optimizer)? {
                        Some(c) => {
                            let cell = c.to_cell();
                            let r = format!("{}via {}\n", render_cell(&cell), c.label);
                            (single_cell_table(&pr.combined, cell), EXIT_YES, r)
                        }
                        None => {
                            let mut cell = Cell::from_decision(crate::classifier::Decision {
                                p: j,
                                class,
                                verdict: crate::classifier::Verdict::Unknown("no admissible construction passed the checks".into()),
                                trace: Default::default(),
                            });
                            cell.source = crate::classifier::CellSource::Construction("none".into());
                            let r = render_cell(&cell);
                            (single_cell_table(&pr.combined, cell), EXIT_UNKNOWN, r)
                        }
                    }
                }
                None => {
                    let lt = classification_table(&x, &budget)?;
                    let rt = classification_table(&y, &budget)?;
                    let t = product_table(&pr, &lt, &rt, &budget.optimizer, &budget.simple_search)?;
                    let r = report::render_table(&t);
                    let code = table_code(&t);
                    (t, code, r)
                }
            };
            let body = json!({ "search": search_json(&search, seed), "factors": factors, "table": table_json(&table) });
            Ok(emit(&envelope("product", seed, Some(&pr.combined), body, rendering), &out, code))
        }
        Command::InvertBalanced { form, out } => {
            let omega_big = parse_form_file(&std::fs::read_to_string(&form)?)?;
            let n = omega_big.n();
            let omega = invert_balanced(&omega_big)?;
            let lambdas = spectrum(&omega)?.values;
            let power = omega.power(n - 1).scale(&num_complex::Complex64::new(1.0 / crate::positivity::factorial(n - 1), 0.0));
            let target = omega_big.to_float();
            let residual = power.sub(&target).max_abs() / target.max_abs().max(1.0);
            let rendering = format!(
                "omega eigenvalues: {}\nrelative residual: {residual:.3e}\n",
                lambdas.iter().map(|l| format!("{l:.10}")).collect::<Vec<_>>().join(", ")
            );
            let body = json!({
                "input": report::form_json(&omega_big),
                "omega": float_form_json(&omega),
                "eigenvalues": lambdas,
                "residual": residual,
            });
            Ok(emit(&envelope("invert-balanced", DEFAULT_SEED, None, body, rendering), &out, EXIT_YES))
        }
        Command::Verify { report: path } => {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
            let s = report::verify_report(&v)?;
            let mut text = format!("checked {} cells, skipped {}\n", s.checked, s.skipped);
            for f in &s.failures {
                text.push_str(&format!("FAIL {f}\n"));
            }
            Ok(Outcome::ok(if s.passed() { EXIT_YES } else { EXIT_NO }, text))
        }
    }
}
