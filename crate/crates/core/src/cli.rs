//! Command-line front end.
//!
//! Exit codes: 0 success (or a `Yes`/`ProbablyYes` verdict), 10 a certified
//! `No`, 2 usage or input errors, 3 a consistency failure between methods,
//! 1 anything else.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::corpus::mixed_corpus;
use crate::decide::{Decider, DecideOptions, Decomposable, Method, VerdictDoc, DEFAULT_PRIME, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::exterior::{load_multivector, Multivector};
use crate::gcp::GcpDoc;
use crate::param::{h_poly, h_probabilistic, HPolyDoc, HVerdict};
use crate::poly::MultiPolyDoc;
use crate::relations::{
    count_pluecker, count_rank6, enumerate_pluecker, enumerate_rank6, expand_rank6, expansion_form,
    pluecker_form_raw, rank6_form, ExpansionSummand, FormDoc, Relation, RelationDoc, RelationSet,
    RelationTriple,
};
use crate::scalar::FieldSpec;
use crate::witness::{brute_force_decomposable, witness_search};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
pub const EXIT_NO: i32 = 10;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "GRASSKIT_SEED";

#[derive(Debug, Parser)]
#[command(name = "grasskit", version, about = "Decomposability of p-vectors via quadratic relations")]
pub struct Cli {
    /// Coefficient field: `rational` or `prime:Q`. Inputs are converted into it.
    #[arg(long, global = true)]
    pub field: Option<FieldSpec>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SetKind {
    Pluecker,
    Rank6,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParamMode {
    Symbolic,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream the relations of one family as JSON lines.
    Relations {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        set: SetKind,
        /// Include each relation's expanded quadratic form.
        #[arg(long)]
        forms: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sizes of both relation sets from the closed formulas.
    Count {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        /// Also count by enumeration.
        #[arg(long)]
        verify: bool,
    },
    /// Decide decomposability of a multivector.
    Decide {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated methods, or `all` for every method applicable to the input.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        method: Vec<String>,
        #[arg(long)]
        cross_check: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Include per-method wall times (microseconds).
        #[arg(long)]
        timings: bool,
    },
    /// Find a rank-6 relation that does not vanish at the input.
    Witness {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Expand a rank-6 relation into Plücker relations and verify the sum.
    Expand {
        #[arg(long)]
        triple: PathBuf,
        /// Ambient dimension; defaults to the largest index in the triple.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Show the maps X and Z of a triple and the pullback sign.
    Gcpmap {
        #[arg(long)]
        triple: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// The parametric criterion polynomial H, symbolically or at random points.
    Param {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ParamMode,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        prime: Option<u64>,
    },
    /// Per-method timing and verdict statistics on a random corpus, as CSV.
    Bench {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', default_value = "all")]
        method: Vec<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Consistency(_) | Error::PullbackMismatch(_) => EXIT_CONSISTENCY,
        Error::InvalidField(_)
        | Error::FieldMismatch(..)
        | Error::ParseScalar { .. }
        | Error::IndexOutOfRange { .. }
        | Error::DegreeOverflow { .. }
        | Error::ShapeMismatch(_)
        | Error::InvalidIndexSet(_)
        | Error::InvalidTriple(_)
        | Error::BadPrime { .. }
        | Error::DenominatorClash(..)
        | Error::MethodInapplicable { .. }
        | Error::Format(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Format(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn load_input(path: &Path, field: Option<FieldSpec>) -> Result<Multivector> {
    let w = load_multivector(&read_text(path)?).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })?;
    match field {
        None => Ok(w),
        Some(f) if f == w.field() => Ok(w),
        Some(f) => {
            let terms = w
                .terms()
                .map(|(t, c)| Ok((t.indices().to_vec(), f.convert(c)?)))
                .collect::<Result<Vec<_>>>()?;
            Multivector::from_terms(f, w.n(), w.degree(), terms)
        }
    }
}

fn load_triple(path: &Path) -> Result<RelationTriple> {
    let text = read_text(path)?;
    let doc: RelationDoc =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    match Relation::from(&doc) {
        Relation::Rank6(t) => Ok(t),
        Relation::Pluecker(_) => Err(Error::Format(format!(
            "{}: expected a rank6 relation",
            path.display()
        ))),
    }
}

fn resolve_seed(seed: Option<u64>) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
            Err(_) => Ok(0),
        },
    }
}

fn parse_methods(names: &[String], p: usize, n: usize) -> Result<Vec<Method>> {
    if names.iter().any(|s| s == "all") {
        return Ok(Method::ALL
            .into_iter()
            .filter(|m| m.inapplicable(p, n).is_none())
            .collect());
    }
    names.iter().map(|s| s.parse()).collect()
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let s = serde_json::to_string(value).expect("serializable");
    Ok(writeln!(out, "{s}")?)
}

#[derive(Serialize, Deserialize)]
struct RelationLine {
    #[serde(flatten)]
    relation: RelationDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    form: Option<FormDoc>,
}

#[derive(Serialize, Deserialize)]
struct CountDoc {
    pluecker: u128,
    rank6: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    enumerated: Option<EnumeratedDoc>,
}

#[derive(Serialize, Deserialize)]
struct EnumeratedDoc {
    pluecker: u128,
    rank6: u128,
    agree: bool,
}

#[derive(Serialize, Deserialize)]
struct ExpandDoc {
    triple: RelationDoc,
    n: usize,
    p: usize,
    summands: Vec<ExpansionSummand>,
    verified: bool,
}

#[derive(Serialize, Deserialize)]
struct DecomposableDoc {
    decomposable: Decomposable,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let field = cli.field;
    let form_field = field.unwrap_or(FieldSpec::Rational);
    match &cli.command {
        Command::Relations { p, n, set, forms, out: path } => {
            let mut file;
            let sink: &mut dyn Write = match path {
                Some(path) => {
                    file = io::BufWriter::new(
                        fs::File::create(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
                    );
                    &mut file
                }
                None => out,
            };
            let (p, n) = (*p, *n);
            match set {
                SetKind::Pluecker => {
                    for idx in enumerate_pluecker(p, n) {
                        let form = if *forms {
                            Some(FormDoc::from_form(&pluecker_form_raw(form_field, n, &idx.a, &idx.b)?))
                        } else {
                            None
                        };
                        let relation = RelationDoc::from(&Relation::Pluecker(idx));
                        json_line(sink, &RelationLine { relation, form })?;
                    }
                }
                SetKind::Rank6 => {
                    for t in enumerate_rank6(p, n) {
                        let form = if *forms {
                            Some(FormDoc::from_form(&rank6_form(form_field, n, p, &t)?))
                        } else {
                            None
                        };
                        json_line(sink, &RelationLine {
                            relation: RelationDoc::triple(&t),
                            form,
                        })?;
                    }
                }
            }
            sink.flush()?;
            Ok(EXIT_OK)
        }
        Command::Count { p, n, verify } => {
            let enumerated = verify.then(|| {
                let pl = enumerate_pluecker(*p, *n).count() as u128;
                let r6 = enumerate_rank6(*p, *n).count() as u128;
                EnumeratedDoc {
                    pluecker: pl,
                    rank6: r6,
                    agree: pl == count_pluecker(*p, *n) && r6 == count_rank6(*p, *n),
                }
            });
            let failed = enumerated.as_ref().is_some_and(|e| !e.agree);
            json_line(out, &CountDoc {
                pluecker: count_pluecker(*p, *n),
                rank6: count_rank6(*p, *n),
                enumerated,
            })?;
            Ok(if failed { EXIT_CONSISTENCY } else { EXIT_OK })
        }
        Command::Decide {
            input,
            method,
            cross_check,
            seed,
            prime,
            trials,
            timings,
        } => {
            let w = load_input(input, field)?;
            let methods = parse_methods(method, w.degree(), w.n())?;
            let options = DecideOptions {
                cross_check: *cross_check,
                seed: resolve_seed(*seed)?,
                prime: prime.unwrap_or(DEFAULT_PRIME),
                trials: trials.unwrap_or(DEFAULT_TRIALS),
            };
            let verdict = Decider::new(options).decide(&w, &methods)?;
            json_line(out, &VerdictDoc::from_verdict(&verdict, *timings))?;
            Ok(if verdict.decomposable == Decomposable::No {
                EXIT_NO
            } else {
                EXIT_OK
            })
        }
        Command::Witness { input } => {
            let w = load_input(input, field)?;
            if brute_force_decomposable(&w) {
                json_line(out, &DecomposableDoc {
                    decomposable: Decomposable::Yes,
                })?;
                return Ok(EXIT_OK);
            }
            json_line(out, &witness_search(&w)?.to_doc())?;
            Ok(EXIT_NO)
        }
        Command::Expand { triple, n } => {
            let t = load_triple(triple)?;
            let n = n.unwrap_or_else(|| t.all_indices().into_iter().max().unwrap_or(0));
            let p = t.degree();
            let summands = expand_rank6(&t);
            let verified = expansion_form(form_field, n, p, &summands)? == rank6_form(form_field, n, p, &t)?;
            json_line(out, &ExpandDoc {
                triple: RelationDoc::triple(&t),
                n,
                p,
                summands,
                verified,
            })?;
            Ok(if verified { EXIT_OK } else { EXIT_CONSISTENCY })
        }
        Command::Gcpmap { triple, n } => {
            let t = load_triple(triple)?;
            json_line(out, &GcpDoc::build(form_field, &t, *n)?)?;
            Ok(EXIT_OK)
        }
        Command::Param {
            input,
            mode,
            trials,
            seed,
            prime,
        } => {
            let w = load_input(input, field)?;
            match mode {
                ParamMode::Symbolic => {
                    let h = h_poly(&w)?;
                    json_line(out, &HPolyDoc {
                        p: w.degree(),
                        n: w.n(),
                        zero: h.is_zero(),
                        h: MultiPolyDoc::from_poly(&h),
                    })?;
                    Ok(if h.is_zero() { EXIT_OK } else { EXIT_NO })
                }
                ParamMode::Random => {
                    let prime = match (prime, w.field()) {
                        (Some(q), _) => *q,
                        (None, FieldSpec::Prime(q)) => q,
                        (None, FieldSpec::Rational) => DEFAULT_PRIME,
                    };
                    let r = h_probabilistic(&w, *trials, resolve_seed(*seed)?, prime)?;
                    json_line(out, &r.to_doc())?;
                    Ok(match r.verdict {
                        HVerdict::ZeroSoFar => EXIT_OK,
                        HVerdict::NonzeroWitness { .. } => EXIT_NO,
                    })
                }
            }
        }
        Command::Bench {
            p,
            n,
            samples,
            seed,
            method,
            jobs,
        } => {
            let seed = resolve_seed(*seed)?;
            let methods = parse_methods(method, *p, *n)?;
            let rows = bench(form_field, *p, *n, *samples, seed, &methods, *jobs)?;
            write!(out, "{}", bench_csv(&rows))?;
            Ok(EXIT_OK)
        }
    }
}

/// Aggregated benchmark figures for one method.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub samples: usize,
    pub yes: usize,
    pub no: usize,
    pub probably_yes: usize,
    /// Violated relations summed over samples (relation methods only).
    pub violations: Option<usize>,
    pub total_micros: u64,
}

struct SampleResult {
    method: Method,
    decomposable: Decomposable,
    violations: Option<usize>,
    micros: u64,
}

fn bench_chunk(
    field: FieldSpec,
    p: usize,
    n: usize,
    corpus: &[Multivector],
    methods: &[Method],
    seed: u64,
) -> Result<Vec<SampleResult>> {
    let mut decider = Decider::new(DecideOptions {
        seed,
        ..Default::default()
    });
    let rank6 = methods.contains(&Method::Rank6).then(|| RelationSet::rank6(field, p, n));
    let pluecker = methods.contains(&Method::Pluecker).then(|| RelationSet::pluecker(field, p, n));
    let mut results = Vec::new();
    for w in corpus {
        for &m in methods {
            let start = Instant::now();
            let v = decider.decide(w, &[m])?;
            let micros = start.elapsed().as_micros() as u64;
            let violations = match m {
                Method::Rank6 => Some(rank6.as_ref().expect("built").violation_count(w)?),
                Method::Pluecker => Some(pluecker.as_ref().expect("built").violation_count(w)?),
                _ => None,
            };
            results.push(SampleResult {
                method: m,
                decomposable: v.decomposable,
                violations,
                micros,
            });
        }
    }
    Ok(results)
}

/// Runs every method on a seeded mixed corpus, split across `jobs` threads.
/// Everything except the timings is independent of `jobs`.
pub fn bench(
    field: FieldSpec,
    p: usize,
    n: usize,
    samples: usize,
    seed: u64,
    methods: &[Method],
    jobs: usize,
) -> Result<Vec<BenchRow>> {
    for &m in methods {
        if let Some(reason) = m.inapplicable(p, n) {
            return Err(Error::MethodInapplicable {
                method: m.to_string(),
                reason,
            });
        }
    }
    if p > n {
        return Err(Error::ShapeMismatch(format!("p = {p} exceeds n = {n}")));
    }
    let corpus: Vec<Multivector> = mixed_corpus(field, n, p, samples, seed).into_iter().map(|s| s.w).collect();
    let jobs = jobs.max(1);
    let chunk = corpus.len().div_ceil(jobs).max(1);
    let parts: Vec<Result<Vec<SampleResult>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = corpus
            .chunks(chunk)
            .map(|part| scope.spawn(move || bench_chunk(field, p, n, part, methods, seed)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    let mut rows: Vec<BenchRow> = methods
        .iter()
        .map(|&m| BenchRow {
            method: m,
            samples: 0,
            yes: 0,
            no: 0,
            probably_yes: 0,
            violations: matches!(m, Method::Rank6 | Method::Pluecker).then_some(0),
            total_micros: 0,
        })
        .collect();
    for part in parts {
        for r in part? {
            let row = rows.iter_mut().find(|row| row.method == r.method).expect("known method");
            row.samples += 1;
            match r.decomposable {
                Decomposable::Yes => row.yes += 1,
                Decomposable::No => row.no += 1,
                Decomposable::ProbablyYes => row.probably_yes += 1,
            }
            if let (Some(total), Some(v)) = (row.violations.as_mut(), r.violations) {
                *total += v;
            }
            row.total_micros += r.micros;
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("method,samples,yes,no,probably_yes,mean_violations,total_micros,mean_micros\n");
    for r in rows {
        let denom = r.samples.max(1) as f64;
        let violations = r
            .violations
            .map(|v| format!("{:.3}", v as f64 / denom))
            .unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{:.1}\n",
            r.method,
            r.samples,
            r.yes,
            r.no,
            r.probably_yes,
            violations,
            r.total_micros,
            r.total_micros as f64 / denom
        ));
    }
    s
}
