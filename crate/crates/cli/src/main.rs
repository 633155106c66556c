//! `hmzf` command-line front end.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on usage or
//! domain errors.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hmzf::composition::{parse_composition, Composition, FormalSum};
use hmzf::graded::{dimension_report, verify_freeness, GeneratorTable};
use hmzf::hurwitz::{
    eval_h1, eval_hmzf, parse_point, EvalRequest, EvalResult, DEFAULT_PRECISION, DEFAULT_TOLERANCE,
};
use hmzf::lab::{
    check_difference_equation, check_stuffle_identity, default_points, end_to_end_check,
    independence_certificate, Candidate, CheckReport, IndependenceCertificate, IndependenceVerdict,
};
use hmzf::lyndon::{cfl_factorize, count_lyndon, generate_lyndon, is_lyndon};
use hmzf::mp::Complex;
use hmzf::{enumerate_compositions, reduce_to_normal_form, stuffle};

#[derive(Parser)]
#[command(
    name = "hmzf",
    version,
    about = "Hurwitz multizeta functions: stuffle algebra, generators, evaluation and identity checks"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Stuffle product of two compositions.
    Stuffle { a: String, b: String },
    /// Lyndon words over the positive integers.
    Lyndon {
        #[command(subcommand)]
        action: LyndonAction,
    },
    /// Dimensions of the weight components.
    Dims {
        #[arg(long, default_value_t = 12)]
        max_weight: u32,
    },
    /// Generator table.
    Generators {
        #[arg(long, default_value_t = 7)]
        max_weight: u32,
    },
    /// Normal form of a convergent composition in the generators.
    Reduce {
        composition: String,
        /// Table size; defaults to the weight of the composition.
        #[arg(long)]
        max_weight: Option<u32>,
    },
    /// Evaluate He^C(z); C = 1 gives the regularized function.
    Eval {
        composition: String,
        /// `re` or `re,im`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Working precision in decimal digits.
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        check: VerifyCheck,
    },
    /// Reproduce all acceptance tables in one run.
    Report {
        #[arg(long, default_value_t = 7)]
        max_weight: u32,
    },
}

#[derive(Subcommand)]
enum LyndonAction {
    /// Is the word a Lyndon word?
    Test { word: String },
    /// Chen–Fox–Lyndon factorization.
    Factorize { word: String },
    /// All Lyndon words up to a weight.
    List {
        #[arg(long, default_value_t = 6)]
        max_weight: u32,
    },
    /// Number of Lyndon words of a weight.
    Count { weight: u32 },
}

#[derive(Subcommand)]
enum VerifyCheck {
    /// He^a·He^b against the stuffle expansion, all pairs up to a total weight.
    Stuffle {
        #[arg(long, default_value_t = 6)]
        max_weight: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Sample points, each `re` or `re,im` [default: 0 0.5 1,1].
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        points: Option<Vec<String>>,
    },
    /// Difference equation for every convergent composition up to a weight.
    Diffeq {
        #[arg(long, default_value_t = 6)]
        max_weight: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Sample points [default: 1 2 0.5 1,1].
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        points: Option<Vec<String>>,
    },
    /// Numeric rank of z^j·He^c sampled at points; `()` is the empty composition.
    Independence {
        #[arg(required = true)]
        compositions: Vec<String>,
        #[arg(long, default_value_t = 0)]
        degree: u32,
        /// Sample points [default: 1/2, 1, 3/2, … then 1+i, 2+i; as many as needed].
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        points: Option<Vec<String>>,
    },
    /// Direct evaluation against the normal form, up to a weight.
    Endtoend {
        #[arg(long, default_value_t = 5)]
        max_weight: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Sample points [default: 0 0.5 1,1].
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        points: Option<Vec<String>>,
    },
    /// Freeness of the algebra with Lyndon-counted generators.
    Freeness {
        #[arg(long, default_value_t = 7)]
        max_weight: u32,
    },
}

/// Result of one subcommand.
struct Output {
    command: String,
    parameters: Vec<(&'static str, Value)>,
    text: String,
    result: Value,
    passed: bool,
}

impl Output {
    fn new(command: &str, parameters: Vec<(&'static str, Value)>) -> Self {
        Output {
            command: command.to_string(),
            parameters,
            text: String::new(),
            result: Value::Null,
            passed: true,
        }
    }

    fn header(&self) -> String {
        let params: Vec<String> = self
            .parameters
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        format!("# hmzf {} {}", self.command, params.join(" "))
    }

    fn structured(&self) -> Value {
        let params: serde_json::Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        json!({
            "command": self.command,
            "parameters": params,
            "result": self.result,
            "status": if self.passed { "pass" } else { "fail" },
        })
    }
}

type CliResult = Result<Output, String>;

fn composition_arg(text: &str) -> Result<Composition, String> {
    let inner = text.trim();
    let inner = inner
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(inner);
    parse_composition(inner).map_err(|e| format!("invalid composition {text:?}: {e}"))
}

fn points_arg(
    points: &Option<Vec<String>>,
    default: &[&str],
) -> Result<(Vec<Complex>, Vec<String>), String> {
    let texts: Vec<String> = match points {
        Some(p) => p.clone(),
        None => default.iter().map(|s| s.to_string()).collect(),
    };
    let parsed = texts
        .iter()
        .map(|t| parse_point(t).map_err(|e| format!("invalid point {t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((parsed, texts))
}

/// Terms in lexicographic order of their compositions.
fn lex_text(sum: &FormalSum) -> String {
    let mut terms: Vec<_> = sum.iter().collect();
    terms.sort_by(|a, b| a.0.lex_cmp(b.0));
    if terms.is_empty() {
        return "0".into();
    }
    // FormalSum prints in canonical order, so format term by term
    let mut out = String::new();
    for (i, (c, q)) in terms.iter().enumerate() {
        let single: FormalSum = std::iter::once(((*c).clone(), (*q).clone())).collect();
        let t = single.to_string();
        match (i, t.strip_prefix('-')) {
            (0, _) => out.push_str(&t),
            (_, Some(rest)) => write!(out, " - {rest}").unwrap(),
            (_, None) => write!(out, " + {t}").unwrap(),
        }
    }
    out
}

fn cmd_stuffle(a: &str, b: &str) -> CliResult {
    let (ca, cb) = (composition_arg(a)?, composition_arg(b)?);
    let product = stuffle(&ca, &cb);
    let mut out = Output::new(
        "stuffle",
        vec![("a", json!(ca.to_text())), ("b", json!(cb.to_text()))],
    );
    out.text = lex_text(&product);
    out.result = serde_json::to_value(product.to_serial()).expect("serializable");
    Ok(out)
}

fn cmd_lyndon(action: &LyndonAction) -> CliResult {
    match action {
        LyndonAction::Test { word } => {
            let w = composition_arg(word)?;
            let yes = is_lyndon(&w);
            let mut out = Output::new("lyndon test", vec![("word", json!(w.to_text()))]);
            out.text = format!("{w}: {}", if yes { "lyndon" } else { "not lyndon" });
            out.result = json!({ "word": w.parts(), "is_lyndon": yes });
            Ok(out)
        }
        LyndonAction::Factorize { word } => {
            let w = composition_arg(word)?;
            let f = cfl_factorize(&w).map_err(|e| e.to_string())?;
            let mut out = Output::new("lyndon factorize", vec![("word", json!(w.to_text()))]);
            out.text = f.to_string();
            out.result = json!(f
                .factors
                .iter()
                .map(|l| l.word().parts().to_vec())
                .collect::<Vec<_>>());
            Ok(out)
        }
        LyndonAction::List { max_weight } => {
            let groups = generate_lyndon(*max_weight).map_err(|e| e.to_string())?;
            let mut out = Output::new("lyndon list", vec![("max_weight", json!(max_weight))]);
            let mut structured = Vec::new();
            for (n, words) in &groups {
                let shown: Vec<String> = words.iter().map(ToString::to_string).collect();
                writeln!(out.text, "{n}: {}", shown.join(" ")).unwrap();
                structured.push(json!({
                    "weight": n,
                    "words": words.iter().map(|w| w.word().parts().to_vec()).collect::<Vec<_>>(),
                }));
            }
            out.text.pop();
            out.result = json!(structured);
            Ok(out)
        }
        LyndonAction::Count { weight } => {
            let n = count_lyndon(*weight).map_err(|e| e.to_string())?;
            let mut out = Output::new("lyndon count", vec![("weight", json!(weight))]);
            out.text = n.to_string();
            out.result = json!({ "weight": weight, "count": n.to_string() });
            Ok(out)
        }
    }
}

fn cmd_dims(max_weight: u32) -> CliResult {
    let report = dimension_report(max_weight);
    let mut out = Output::new("dims", vec![("max_weight", json!(max_weight))]);
    writeln!(out.text, "{:>3} {:>12} {:>12}", "n", "dim", "2^(n-1)").unwrap();
    for (n, (d, p)) in report
        .dimensions
        .iter()
        .zip(&report.doubling_formula)
        .enumerate()
    {
        writeln!(out.text, "{n:>3} {d:>12} {p:>12}").unwrap();
    }
    write!(out.text, "note: {}", report.note).unwrap();
    out.result = serde_json::to_value(&report).expect("serializable");
    Ok(out)
}

fn build_table(max_weight: u32) -> Result<GeneratorTable, String> {
    GeneratorTable::build(max_weight).map_err(|e| e.to_string())
}

fn cmd_generators(max_weight: u32) -> CliResult {
    let table = build_table(max_weight)?;
    let mut out = Output::new("generators", vec![("max_weight", json!(max_weight))]);
    for n in 2..=max_weight {
        let gens: Vec<String> = table
            .generators(n)
            .iter()
            .map(ToString::to_string)
            .collect();
        writeln!(out.text, "{n}: {}", gens.join(" ")).unwrap();
    }
    out.text.pop();
    out.result = serde_json::to_value(table.to_serial()).expect("serializable");
    Ok(out)
}

fn cmd_reduce(composition: &str, max_weight: Option<u32>) -> CliResult {
    let c = composition_arg(composition)?;
    let max_weight = max_weight.unwrap_or((c.weight() as u32).max(2));
    let table = build_table(max_weight)?;
    let p = reduce_to_normal_form(&c, &table).map_err(|e| e.to_string())?;
    let mut out = Output::new(
        "reduce",
        vec![
            ("composition", json!(c.to_text())),
            ("max_weight", json!(max_weight)),
        ],
    );
    out.text = p.to_string();
    out.result = serde_json::to_value(p.to_serial()).expect("serializable");
    Ok(out)
}

fn eval_text(r: &EvalResult) -> String {
    let p = &r.params;
    format!(
        "value        {:.digits$}\nerror_bound  {:.3e}\nbound_kind   {}\ntruncation   {}\nem_order     {}\nprecision    {}\nbits         {}",
        r.value,
        r.error_bound,
        serde_json::to_value(p.bound_kind).expect("serializable").as_str().unwrap_or(""),
        p.truncation,
        p.em_order,
        p.precision,
        p.bits,
        digits = p.precision as usize,
    )
}

fn cmd_eval(composition: &str, z: &str, tol: f64, precision: u32) -> CliResult {
    let c = composition_arg(composition)?;
    let point = parse_point(z).map_err(|e| format!("invalid point {z:?}: {e}"))?;
    let req = EvalRequest::new(c.clone(), point.clone())
        .with_tolerance(tol)
        .with_precision(precision);
    let result = if c.parts() == [1] {
        req.validate().map_err(|e| e.to_string())?;
        eval_h1(&point, precision)
    } else {
        eval_hmzf(&req)
    }
    .map_err(|e| e.to_string())?;
    let mut out = Output::new(
        "eval",
        vec![
            ("composition", json!(c.to_text())),
            ("z", json!(z)),
            ("tol", json!(tol)),
            ("precision", json!(precision)),
        ],
    );
    out.text = eval_text(&result);
    out.result = serde_json::to_value(result.to_serial()).expect("serializable");
    Ok(out)
}

fn convergent_nonempty(max_weight: u32) -> Vec<Composition> {
    (2..=max_weight)
        .flat_map(|n| enumerate_compositions(n, true))
        .collect()
}

/// Collects check reports into an output.
fn report_lines(out: &mut Output, reports: Vec<CheckReport>) {
    let mut worst: f64 = 0.0;
    for r in &reports {
        worst = worst.max(r.max_residual);
        out.passed &= r.passed();
        writeln!(
            out.text,
            "{:<4} {:.2e}  {}",
            r.verdict, r.max_residual, r.description
        )
        .unwrap();
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    write!(
        out.text,
        "{passed}/{} passed, max residual {worst:.2e}",
        reports.len()
    )
    .unwrap();
    out.result = json!({
        "checks": reports,
        "passed": passed,
        "total": reports.len(),
        "max_residual": worst,
    });
}

fn cmd_verify(check: &VerifyCheck) -> CliResult {
    match check {
        VerifyCheck::Stuffle {
            max_weight,
            tol,
            points,
        } => {
            let (pts, texts) = points_arg(points, &["0", "0.5", "1,1"])?;
            let pool: Vec<Composition> = (0..=*max_weight)
                .flat_map(|n| enumerate_compositions(n, true))
                .collect();
            let mut reports = Vec::new();
            for (i, a) in pool.iter().enumerate() {
                for b in &pool[i..] {
                    if a.weight() + b.weight() <= u64::from(*max_weight) {
                        reports.push(
                            check_stuffle_identity(a, b, &pts, *tol).map_err(|e| e.to_string())?,
                        );
                    }
                }
            }
            let mut out = Output::new(
                "verify stuffle",
                vec![
                    ("max_weight", json!(max_weight)),
                    ("tol", json!(tol)),
                    ("points", json!(texts)),
                ],
            );
            report_lines(&mut out, reports);
            Ok(out)
        }
        VerifyCheck::Diffeq {
            max_weight,
            tol,
            points,
        } => {
            let (pts, texts) = points_arg(points, &["1", "2", "0.5", "1,1"])?;
            let reports = convergent_nonempty(*max_weight)
                .iter()
                .map(|c| check_difference_equation(c, &pts, *tol).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = Output::new(
                "verify diffeq",
                vec![
                    ("max_weight", json!(max_weight)),
                    ("tol", json!(tol)),
                    ("points", json!(texts)),
                ],
            );
            report_lines(&mut out, reports);
            Ok(out)
        }
        VerifyCheck::Endtoend {
            max_weight,
            tol,
            points,
        } => {
            let (pts, texts) = points_arg(points, &["0", "0.5", "1,1"])?;
            let table = build_table((*max_weight).max(2))?;
            let mut reports = Vec::new();
            for c in convergent_nonempty(*max_weight) {
                for z in &pts {
                    reports.push(end_to_end_check(&c, z, *tol, &table).map_err(|e| e.to_string())?);
                }
            }
            let mut out = Output::new(
                "verify endtoend",
                vec![
                    ("max_weight", json!(max_weight)),
                    ("tol", json!(tol)),
                    ("points", json!(texts)),
                ],
            );
            report_lines(&mut out, reports);
            Ok(out)
        }
        VerifyCheck::Independence {
            compositions,
            degree,
            points,
        } => {
            let cands = compositions
                .iter()
                .map(|t| composition_arg(t).map(Candidate::Hmzf))
                .collect::<Result<Vec<_>, _>>()?;
            let needed = cands.len() * (*degree as usize + 1) + hmzf::lab::POINT_SLACK;
            let (pts, texts) = match points {
                Some(_) => points_arg(points, &[])?,
                None => {
                    let pts = default_points(needed);
                    let texts = pts.iter().map(point_text).collect();
                    (pts, texts)
                }
            };
            let cert =
                independence_certificate(&cands, *degree, &pts).map_err(|e| e.to_string())?;
            let mut out = Output::new(
                "verify independence",
                vec![
                    ("candidates", json!(cert.candidates)),
                    ("degree", json!(degree)),
                    ("points", json!(texts)),
                ],
            );
            out.text = certificate_text(&cert);
            out.passed = cert.verdict == IndependenceVerdict::NoRelationFound;
            out.result = serde_json::to_value(&cert).expect("serializable");
            Ok(out)
        }
        VerifyCheck::Freeness { max_weight } => {
            let report = verify_freeness(*max_weight).map_err(|e| e.to_string())?;
            let mut out = Output::new("verify freeness", vec![("max_weight", json!(max_weight))]);
            writeln!(
                out.text,
                "{:>3} {:>6} {:>8} {:>5} {:>7} {:>10} {:>5} {:>6} {}",
                "n", "dim", "2^(n-1)", "gens", "lyndon", "monomials", "rank", "euler", "ok"
            )
            .unwrap();
            for r in &report.rows {
                writeln!(
                    out.text,
                    "{:>3} {:>6} {:>8} {:>5} {:>7} {:>10} {:>5} {:>6} {}",
                    r.weight,
                    r.dimension,
                    r.doubling_formula,
                    r.generators,
                    r.lyndon_count,
                    r.monomials,
                    r.rank,
                    r.euler_coefficient,
                    if r.passed() { "pass" } else { "fail" }
                )
                .unwrap();
            }
            write!(out.text, "note: {}", report.note).unwrap();
            out.passed = report.all_pass;
            out.result = serde_json::to_value(&report).expect("serializable");
            Ok(out)
        }
    }
}

fn point_text(z: &Complex) -> String {
    let (re, im) = z.to_f64();
    if im == 0.0 {
        format!("{re}")
    } else {
        format!("{re},{im}")
    }
}

fn certificate_text(cert: &IndependenceCertificate) -> String {
    let mut t = String::new();
    writeln!(t, "candidates   {}", cert.candidates.join(", ")).unwrap();
    writeln!(t, "matrix       {} × {}", cert.rows, cert.columns).unwrap();
    writeln!(t, "threshold    {:.3e}", cert.threshold).unwrap();
    writeln!(t, "rank         {}", cert.numeric_rank).unwrap();
    let sv: Vec<String> = cert
        .singular_values
        .iter()
        .map(|s| format!("{s:.3e}"))
        .collect();
    writeln!(t, "singular     {}", sv.join(" ")).unwrap();
    let verdict = serde_json::to_value(cert.verdict).expect("serializable");
    write!(t, "verdict      {}", verdict.as_str().unwrap_or("")).unwrap();
    for (i, r) in cert.relations.iter().enumerate() {
        let terms: Vec<String> = r
            .terms
            .iter()
            .map(|x| {
                format!(
                    "({:.6e}{:+.6e}i)·z^{}·{}",
                    x.re, x.im, x.power, cert.candidates[x.candidate]
                )
            })
            .collect();
        write!(
            t,
            "\nrelation {i}: {} (held-out residual {:.2e})",
            terms.join(" + "),
            r.held_out_residual
        )
        .unwrap();
    }
    t
}

fn cmd_report(max_weight: u32) -> CliResult {
    let max_weight = max_weight.max(2);
    let sections: Vec<(&str, CliResult)> = vec![
        ("dimensions", cmd_dims(max_weight.max(12))),
        (
            "freeness",
            cmd_verify(&VerifyCheck::Freeness { max_weight }),
        ),
        ("generators", cmd_generators(max_weight)),
        (
            "difference equation",
            cmd_verify(&VerifyCheck::Diffeq {
                max_weight: 6,
                tol: 1e-9,
                points: None,
            }),
        ),
        (
            "stuffle identity",
            cmd_verify(&VerifyCheck::Stuffle {
                max_weight: 6,
                tol: 1e-9,
                points: None,
            }),
        ),
        (
            "end to end",
            cmd_verify(&VerifyCheck::Endtoend {
                max_weight: 5,
                tol: 1e-9,
                points: None,
            }),
        ),
        (
            "independence",
            cmd_verify(&VerifyCheck::Independence {
                compositions: vec!["()".into(), "2".into(), "2,1".into()],
                degree: 2,
                points: None,
            }),
        ),
        (
            "zeta(2)",
            cmd_eval("2", "0", DEFAULT_TOLERANCE, DEFAULT_PRECISION),
        ),
        (
            "zeta(2,1)",
            cmd_eval("2,1", "0", DEFAULT_TOLERANCE, DEFAULT_PRECISION),
        ),
    ];
    let mut out = Output::new("report", vec![("max_weight", json!(max_weight))]);
    let mut results = serde_json::Map::new();
    for (name, section) in sections {
        let section = section?;
        out.passed &= section.passed;
        let summary = section.text.lines().last().unwrap_or("").to_string();
        writeln!(
            out.text,
            "== {name} [{}]",
            if section.passed { "pass" } else { "fail" }
        )
        .unwrap();
        writeln!(out.text, "{}", section.header()).unwrap();
        if section.text.lines().count() > 40 {
            writeln!(out.text, "… {summary}").unwrap();
        } else {
            writeln!(out.text, "{}", section.text).unwrap();
        }
        results.insert(name.to_string(), section.structured());
    }
    out.text.pop();
    out.result = Value::Object(results);
    Ok(out)
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Stuffle { a, b } => cmd_stuffle(a, b),
        Command::Lyndon { action } => cmd_lyndon(action),
        Command::Dims { max_weight } => cmd_dims(*max_weight),
        Command::Generators { max_weight } => cmd_generators(*max_weight),
        Command::Reduce {
            composition,
            max_weight,
        } => cmd_reduce(composition, *max_weight),
        Command::Eval {
            composition,
            z,
            tol,
            precision,
        } => cmd_eval(composition, z, *tol, *precision),
        Command::Verify { check } => cmd_verify(check),
        Command::Report { max_weight } => cmd_report(*max_weight),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => println!("{}\n{}", out.header(), out.text),
                Format::Structured => println!(
                    "{}",
                    serde_json::to_string_pretty(&out.structured()).expect("serializable")
                ),
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
