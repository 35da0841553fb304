//! Command-line driver. Every command prints one JSON report.
//!
//! Exit codes: 0 success or equivalent, 1 well-formed negative (not
//! equivalent, value unresolved, no almost period found), 2 usage or parse
//! error, 3 internal verification failure.

use std::ffi::OsString;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::approx::{almost_periods, bochner_fejer, default_step, mean_value, BFOrders, PeriodGrid};
use crate::dsl::{parse_file, pretty_sum, Workspace};
use crate::equivalence::{
    bohr_equivalent_finite, equivalence_trace, star_equivalent, verify_verdict, Definition, EquivalenceVerdict,
};
use crate::exponents::{integral_basis, qbasis};
use crate::json::{rational_to_string, IntegralBasisJson, JsonReport, QBasisJson, SumJson, VerdictJson};
use crate::sums::ExponentialSum;
use crate::valuesets::{value_set_compare, ComparisonSpec, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// The bundled example file, also reachable as `paper.apeq` when no such
/// file exists on disk.
pub const CORPUS_NAME: &str = "paper.apeq";
pub const CORPUS: &str = include_str!("../corpus/paper.apeq");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DefinitionArg {
    Star,
    Bohr,
}

#[derive(Debug, Parser)]
#[command(
    name = "apeq",
    version,
    about = "Exact equivalence and value-set numerics for exponential sums"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ℚ-basis of a sum's exponents.
    Basis { file: String, sum: String },
    /// Integral basis of a sum's exponents.
    IntegralBasis { file: String, sum: String },
    /// Decide equivalence of two exact sums.
    Equiv {
        file: String,
        sum1: String,
        sum2: String,
        #[arg(long, value_enum, default_value = "star")]
        definition: DefinitionArg,
        /// Decide every truncation n = 1..=N.
        #[arg(long)]
        trace: Option<usize>,
    },
    /// Bochner–Fejér polynomial.
    Bf {
        file: String,
        sum: String,
        /// One order per integral-basis element, or a single order for all.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
    },
    /// Mean value of f(σ+it)e^{−iλt} over t ∈ [−T, T].
    Mean {
        file: String,
        sum: String,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long = "T")]
        t: f64,
    },
    /// Scan for ε-almost periods on a reduced strip.
    AlmostPeriods {
        file: String,
        sum: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma_lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma_hi: f64,
        #[arg(long)]
        tmax: f64,
    },
    /// Compare value sets of two sums on a substrip.
    Values {
        file: String,
        sum1: String,
        sum2: String,
        #[arg(long, allow_hyphen_values = true)]
        sigma_lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma_hi: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 1e4)]
        tcap: f64,
    },
    /// Bundled examples.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    List,
    Run { name: String },
}

/// A named example: an `equiv` run on two sums of the bundled file.
#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub sum1: &'static str,
    pub sum2: &'static str,
    pub trace: Option<usize>,
    pub expected_exit: i32,
}

pub const CORPUS_ENTRIES: [CorpusEntry; 5] = [
    CorpusEntry {
        name: "lambda0",
        description: "exponents 2j-1+1/(2(2j-1)), sum against its negative, every truncation up to 50",
        sum1: "A1",
        sum2: "A2",
        trace: Some(50),
        expected_exit: EXIT_OK,
    },
    CorpusEntry {
        name: "sign-pair",
        description: "e^s + e^2s against -e^s + e^2s",
        sum1: "E1",
        sum2: "E2",
        trace: None,
        expected_exit: EXIT_OK,
    },
    CorpusEntry {
        name: "quarter-pair",
        description: "e^s + e^2s against i e^s + e^2s",
        sum1: "E1",
        sum2: "E3",
        trace: None,
        expected_exit: EXIT_NEGATIVE,
    },
    CorpusEntry {
        name: "prime-twist",
        description: "partial zeta sum over n <= 12 against its twist by a multiplicative character",
        sum1: "D1",
        sum2: "D2",
        trace: None,
        expected_exit: EXIT_OK,
    },
    CorpusEntry {
        name: "remark-truncation",
        description: "coefficients e^-n against e^-2n on exponents 1 - (log n)/n, n = 2..8",
        sum1: "R1",
        sum2: "R2",
        trace: None,
        expected_exit: EXIT_NEGATIVE,
    },
];

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind,
            message: message.into(),
        }
    }
}

struct Outcome {
    code: i32,
    result: Value,
}

/// The bundled corpus parsed.
pub fn corpus_workspace() -> Workspace {
    parse_file(CORPUS, Some(CORPUS_NAME)).expect("bundled corpus parses")
}

fn load(file: &str, warnings: &mut Vec<String>) -> Result<Workspace, Failure> {
    let text = if Path::new(file).exists() {
        std::fs::read_to_string(file).map_err(|e| Failure::usage("io", format!("{file}: {e}")))?
    } else if Path::new(file).file_name().is_some_and(|n| n == CORPUS_NAME) {
        CORPUS.to_string()
    } else {
        return Err(Failure::usage("io", format!("{file}: no such file")));
    };
    let ws = parse_file(&text, Some(file)).map_err(|e| Failure::usage("parse", format!("{file}:{e}")))?;
    warnings.extend(ws.warnings.iter().map(|w| format!("{file}:{w}")));
    Ok(ws)
}

fn get<'a>(ws: &'a Workspace, name: &str) -> Result<&'a ExponentialSum, Failure> {
    ws.get(name)
        .ok_or_else(|| Failure::usage("unknown-sum", format!("no sum named `{name}`; have {:?}", ws.names())))
}

fn verdict_json(v: &EquivalenceVerdict, f: &ExponentialSum) -> Value {
    serde_json::to_value(VerdictJson::new(v, Some(f.table()))).expect("verdict serializes")
}

fn decide(f1: &ExponentialSum, f2: &ExponentialSum, def: DefinitionArg) -> Result<EquivalenceVerdict, Failure> {
    let r = match def {
        DefinitionArg::Star => star_equivalent(f1, f2),
        DefinitionArg::Bohr => bohr_equivalent_finite(f1, f2),
    };
    r.map_err(|e| Failure::usage("input", e.to_string()))
}

fn check(v: &EquivalenceVerdict, f1: &ExponentialSum, f2: &ExponentialSum) -> Result<(), Failure> {
    verify_verdict(v, f1, f2).map_err(|e| Failure {
        code: EXIT_VERIFY,
        kind: "verification",
        message: e.to_string(),
    })
}

fn equiv(
    f1: &ExponentialSum,
    f2: &ExponentialSum,
    definition: DefinitionArg,
    trace: Option<usize>,
) -> Result<Outcome, Failure> {
    let Some(n_max) = trace else {
        let v = decide(f1, f2, definition)?;
        check(&v, f1, f2)?;
        let mut result = verdict_json(&v, f1);
        result["verified"] = json!(true);
        return Ok(Outcome {
            code: if v.equivalent { EXIT_OK } else { EXIT_NEGATIVE },
            result,
        });
    };
    if n_max == 0 || n_max > f1.len() || n_max > f2.len() {
        return Err(Failure::usage(
            "usage",
            format!("--trace must lie in 1..={}", f1.len().min(f2.len())),
        ));
    }
    let trace = equivalence_trace(f1, f2, n_max).map_err(|e| Failure::usage("input", e.to_string()))?;
    let mut entries = Vec::with_capacity(trace.len());
    let mut all = true;
    for (n, v) in &trace {
        let (g1, g2) = (f1.truncate(*n).expect("checked"), f2.truncate(*n).expect("checked"));
        check(v, &g1, &g2)?;
        all &= v.equivalent;
        let basis: Vec<String> = v
            .witness
            .as_ref()
            .map(|w| {
                w.basis
                    .basis
                    .iter()
                    .map(|e| e.display(f1.table()).to_string())
                    .collect()
            })
            .unwrap_or_default();
        entries.push(json!({
            "n": n,
            "equivalent": v.equivalent,
            "integral_basis": basis,
            "verdict": verdict_json(v, f1),
        }));
    }
    Ok(Outcome {
        code: if all { EXIT_OK } else { EXIT_NEGATIVE },
        result: json!({
            "definition": match definition { DefinitionArg::Star => Definition::Star, DefinitionArg::Bohr => Definition::Bohr },
            "all_equivalent": all,
            "verified": true,
            "trace": entries,
        }),
    })
}

fn execute(cmd: &Command, warnings: &mut Vec<String>) -> Result<Outcome, Failure> {
    match cmd {
        Command::Basis { file, sum } => {
            let ws = load(file, warnings)?;
            let f = get(&ws, sum)?;
            let b = qbasis(&f.exponents()).map_err(|e| Failure::usage("input", e.to_string()))?;
            let mut result = serde_json::to_value(QBasisJson::new(&b, Some(f.table()))).expect("serializes");
            result["size"] = json!(b.basis.len());
            Ok(Outcome { code: EXIT_OK, result })
        }
        Command::IntegralBasis { file, sum } => {
            let ws = load(file, warnings)?;
            let f = get(&ws, sum)?;
            let b = integral_basis(f.table(), &f.exponents()).map_err(|e| Failure::usage("input", e.to_string()))?;
            let mut result = serde_json::to_value(IntegralBasisJson::new(&b, Some(f.table()))).expect("serializes");
            result["size"] = json!(b.basis.len());
            Ok(Outcome { code: EXIT_OK, result })
        }
        Command::Equiv {
            file,
            sum1,
            sum2,
            definition,
            trace,
        } => {
            let ws = load(file, warnings)?;
            equiv(get(&ws, sum1)?, get(&ws, sum2)?, *definition, *trace)
        }
        Command::Bf { file, sum, orders } => {
            let ws = load(file, warnings)?;
            let f = get(&ws, sum)?;
            let p = bochner_fejer(f, &BFOrders(orders.clone())).map_err(|e| Failure::usage("input", e.to_string()))?;
            Ok(Outcome {
                code: EXIT_OK,
                result: json!({
                    "basis": IntegralBasisJson::new(&p.basis, Some(f.table())),
                    "lattice_orders": p.lattice_orders.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
                    "weights": p.weights.iter().map(rational_to_string).collect::<Vec<_>>(),
                    "polynomial": SumJson::new(&p.polynomial),
                    "polynomial_text": pretty_sum(&p.polynomial),
                }),
            })
        }
        Command::Mean {
            file,
            sum,
            sigma,
            lambda,
            t,
        } => {
            let ws = load(file, warnings)?;
            let f = get(&ws, sum)?.evaluator();
            let m = mean_value(&f, *sigma, *lambda, *t, default_step(*t))
                .map_err(|e| Failure::usage("input", e.to_string()))?;
            let coefficient = m.value / Complex64::new((lambda * sigma).exp(), 0.0);
            let mut result = serde_json::to_value(m).expect("serializes");
            result["coefficient"] = json!([coefficient.re, coefficient.im]);
            Ok(Outcome { code: EXIT_OK, result })
        }
        Command::AlmostPeriods {
            file,
            sum,
            eps,
            sigma_lo,
            sigma_hi,
            tmax,
        } => {
            let ws = load(file, warnings)?;
            let f = get(&ws, sum)?;
            let grid = PeriodGrid::for_max_exponent(f.max_abs_exponent());
            let rep = almost_periods(&f.evaluator(), *eps, (*sigma_lo, *sigma_hi), *tmax, grid)
                .map_err(|e| Failure::usage("input", e.to_string()))?;
            Ok(Outcome {
                code: if rep.empty { EXIT_NEGATIVE } else { EXIT_OK },
                result: serde_json::to_value(rep).expect("serializes"),
            })
        }
        Command::Values {
            file,
            sum1,
            sum2,
            sigma_lo,
            sigma_hi,
            samples,
            seed,
            tol,
            tcap,
        } => {
            let ws = load(file, warnings)?;
            let (f1, f2) = (get(&ws, sum1)?, get(&ws, sum2)?);
            if !(sigma_lo < sigma_hi) || *samples == 0 || !(*tol > 0.0) || !(*tcap > 0.0) {
                return Err(Failure::usage(
                    "usage",
                    "need sigma-lo < sigma-hi, samples >= 1, tol > 0, tcap > 0",
                ));
            }
            let spec = ComparisonSpec {
                n_samples: *samples,
                seed: *seed,
                tol: *tol,
                t_cap: *tcap,
            };
            let cmp = value_set_compare(f1, f2, (*sigma_lo, *sigma_hi), &spec);
            Ok(Outcome {
                code: if cmp.all_attained() { EXIT_OK } else { EXIT_NEGATIVE },
                result: serde_json::to_value(cmp).expect("serializes"),
            })
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => Ok(Outcome {
                code: EXIT_OK,
                result: json!({
                    "file": CORPUS_NAME,
                    "sums": corpus_workspace().names(),
                    "entries": CORPUS_ENTRIES.iter().map(|e| json!({
                        "name": e.name,
                        "description": e.description,
                        "command": entry_command(e),
                        "expected_exit": e.expected_exit,
                    })).collect::<Vec<_>>(),
                }),
            }),
            CorpusAction::Run { name } => {
                let e = CORPUS_ENTRIES
                    .iter()
                    .find(|e| e.name == name)
                    .ok_or_else(|| Failure::usage("unknown-entry", format!("no corpus entry `{name}`")))?;
                let ws = corpus_workspace();
                let mut out = equiv(get(&ws, e.sum1)?, get(&ws, e.sum2)?, DefinitionArg::Star, e.trace)?;
                out.result = json!({
                    "entry": e.name,
                    "command": entry_command(e),
                    "report": out.result,
                });
                Ok(out)
            }
        },
    }
}

fn entry_command(e: &CorpusEntry) -> String {
    match e.trace {
        Some(n) => format!("equiv {CORPUS_NAME} {} {} --trace {n}", e.sum1, e.sum2),
        None => format!("equiv {CORPUS_NAME} {} {}", e.sum1, e.sum2),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Basis { .. } => "basis",
        Command::IntegralBasis { .. } => "integral-basis",
        Command::Equiv { .. } => "equiv",
        Command::Bf { .. } => "bf",
        Command::Mean { .. } => "mean",
        Command::AlmostPeriods { .. } => "almost-periods",
        Command::Values { .. } => "values",
        Command::Corpus {
            action: CorpusAction::List,
        } => "corpus list",
        Command::Corpus {
            action: CorpusAction::Run { .. },
        } => "corpus run",
    }
}

fn render(report: &JsonReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Runs one command line (including the program name).
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CliOutput {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                    stderr: String::new(),
                };
            }
            let report = JsonReport::new(
                "",
                json!({ "args": echo }),
                json!({ "error": { "kind": "usage", "message": e.to_string() } }),
            );
            return CliOutput {
                code: EXIT_USAGE,
                stdout: render(&report),
                stderr: e.to_string(),
            };
        }
    };
    let mut warnings = Vec::new();
    let (code, result, mut stderr) = match execute(&cli.command, &mut warnings) {
        Ok(o) => (o.code, o.result, String::new()),
        Err(f) => (
            f.code,
            json!({ "error": { "kind": f.kind, "message": f.message } }),
            format!("error: {}\n", f.message),
        ),
    };
    for w in &warnings {
        stderr.push_str(w);
        stderr.push('\n');
    }
    let inputs = json!({ "args": echo, "warnings": warnings });
    CliOutput {
        code,
        stdout: render(&JsonReport::new(command_name(&cli.command), inputs, result)),
        stderr,
    }
}
