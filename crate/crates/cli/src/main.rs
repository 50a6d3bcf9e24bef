//! `mapscope`: enumeration, bijections, series and verification from the
//! command line.
//!
//! Streams are newline-delimited, one object per line. Trees use the
//! parenthesized form `(2 (1) (1))`, permutations are space-separated
//! (`2 5 3 1 4`) and maps are JSON rotation systems.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use mapscope_core::maps::{
    canonical_code, faces, format_map, has_multiple_edges, internal_2face_count, is_nonseparable,
    parse_map, tree_to_map, CombinatorialMap,
};
use mapscope_core::perms::{
    generate_av, in_class, m_count, perm_to_tree, tree_to_perm, Permutation,
};
use mapscope_core::series::{
    asymptotic, csv_rows, reference_coefficient, series, AsymptoticName, LogReal, SeriesName,
};
use mapscope_core::trees::{
    enumerate_restricted_trees, enumerate_trees, format_tree, has_no_only_children,
    is_k_face_free_tree, is_primitive_tree, mef_necessary, parse_tree, tree_stats, LabeledTree,
};
use mapscope_core::verify::{Suite, VerificationReport, Verifier};
use mapscope_core::Error;
use serde_json::{json, Value};

const MAX_ENUMERATE_NODES: usize = 12;
const MAX_SERIES_TERMS: usize = 2000;
const MAX_ASYMPT_INDEX: usize = 100_000;
const SIZE_GUARD_VAR: &str = "MAPSCOPE_MAX_SIZE";

#[derive(Parser)]
#[command(name = "mapscope", version, about = "Non-separable planar maps, β(1,0)-trees and (3142, 2-41-3)-avoiding permutations")]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Object {
    Trees,
    Maps,
    Perms,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Tree,
    Map,
    Perm,
}

#[derive(Subcommand)]
enum Command {
    /// List every object of one size: trees on N nodes, maps on N edges or
    /// class members of length N.
    Enumerate {
        #[arg(long, value_enum)]
        object: Object,
        #[arg(long)]
        size: usize,
        /// primitive | two-face-free | k-face-free=K | mef-necessary |
        /// no-only-children | labels-max=L
        #[arg(long)]
        filter: Option<Filter>,
        #[arg(long)]
        count_only: bool,
    },
    /// Convert objects read from stdin.
    Biject {
        #[arg(long, value_enum)]
        from: Kind,
        #[arg(long, value_enum)]
        to: Kind,
    },
    /// Statistics of each object read from stdin.
    Stats {
        #[arg(long, value_enum)]
        object: Kind,
    },
    /// Exact coefficients x^0..x^N.
    Series {
        #[arg(long)]
        name: SeriesName,
        #[arg(long)]
        terms: usize,
    },
    /// First-order estimate against the exact coefficient.
    Asympt {
        #[arg(long)]
        name: AsymptoticName,
        #[arg(long)]
        at: usize,
    },
    /// Run cross-check suites; exits 1 when any check fails.
    Verify {
        #[arg(long)]
        suite: SuiteChoice,
        #[arg(long)]
        max_size: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Filter {
    Primitive,
    TwoFaceFree,
    KFaceFree(u32),
    MefNecessary,
    NoOnlyChildren,
    LabelsMax(u32),
}

impl FromStr for Filter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |v: &str| v.parse::<u32>().map_err(|_| format!("not a number: {v:?}"));
        match s.split_once('=') {
            None => match s {
                "primitive" => Ok(Filter::Primitive),
                "two-face-free" => Ok(Filter::TwoFaceFree),
                "mef-necessary" => Ok(Filter::MefNecessary),
                "no-only-children" => Ok(Filter::NoOnlyChildren),
                _ => Err(format!("unknown filter {s:?}")),
            },
            Some(("k-face-free", k)) => match number(k)? {
                k @ 2..=4 => Ok(Filter::KFaceFree(k)),
                k => Err(format!("k-face-free needs K in 2..=4, got {k}")),
            },
            Some(("labels-max", l)) => match number(l)? {
                0 => Err("labels-max needs L >= 1".into()),
                l => Ok(Filter::LabelsMax(l)),
            },
            _ => Err(format!("unknown filter {s:?}")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum SuiteChoice {
    One(Suite),
    All,
}

impl FromStr for SuiteChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "all" {
            Ok(SuiteChoice::All)
        } else {
            s.parse().map(SuiteChoice::One)
        }
    }
}

/// Failure of a whole invocation.
enum Failure {
    Input(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            let _ = out.flush();
            eprintln!("mapscope: error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, out: &mut impl Write) -> Outcome {
    match &cli.command {
        Command::Enumerate {
            object,
            size,
            filter,
            count_only,
        } => enumerate(cli.format, *object, *size, *filter, *count_only, out),
        Command::Biject { from, to } => biject(cli.format, *from, *to, out),
        Command::Stats { object } => stats(cli.format, *object, out),
        Command::Series { name, terms } => series_cmd(cli.format, *name, *terms, out),
        Command::Asympt { name, at } => asympt(cli.format, *name, *at, out),
        Command::Verify { suite, max_size } => verify(cli.format, *suite, *max_size, out),
    }
}

fn out_of_range(what: &'static str, value: usize, allowed: String) -> Failure {
    Error::OutOfRange { what, value, allowed }.into()
}

fn keep(t: &LabeledTree, filter: Option<Filter>) -> Result<bool, Error> {
    Ok(match filter {
        None | Some(Filter::LabelsMax(_)) => true,
        Some(Filter::Primitive) => is_primitive_tree(t)?,
        Some(Filter::TwoFaceFree) => is_k_face_free_tree(t, 2)?,
        Some(Filter::KFaceFree(k)) => is_k_face_free_tree(t, k)?,
        Some(Filter::MefNecessary) => mef_necessary(t)?,
        Some(Filter::NoOnlyChildren) => has_no_only_children(t)?,
    })
}

fn filtered_trees(nodes: usize, filter: Option<Filter>) -> Result<Vec<LabeledTree>, Error> {
    let trees = match filter {
        Some(Filter::LabelsMax(cap)) => enumerate_restricted_trees(nodes, cap, false)?,
        _ => enumerate_trees(nodes)?,
    };
    let mut kept = Vec::with_capacity(trees.len());
    for t in trees {
        if keep(&t, filter)? {
            kept.push(t);
        }
    }
    Ok(kept)
}

fn enumerate(
    format: Format,
    object: Object,
    size: usize,
    filter: Option<Filter>,
    count_only: bool,
    out: &mut impl Write,
) -> Outcome {
    let nodes = match object {
        Object::Perms => size + 1,
        Object::Trees | Object::Maps => size,
    };
    if nodes == 0 || nodes > MAX_ENUMERATE_NODES {
        let hi = if object == Object::Perms { MAX_ENUMERATE_NODES - 1 } else { MAX_ENUMERATE_NODES };
        let lo = usize::from(object != Object::Perms);
        return Err(out_of_range("size", size, format!("{lo}..={hi}")));
    }
    let records: Vec<Record> = match object {
        Object::Trees => filtered_trees(nodes, filter)?.iter().map(Record::tree).collect(),
        Object::Maps => filtered_trees(nodes, filter)?
            .iter()
            .map(|t| tree_to_map(t).map(|m| Record::map(&m)))
            .collect::<Result<_, _>>()?,
        Object::Perms => {
            let mut perms = match filter {
                None => generate_av(size),
                Some(_) => filtered_trees(nodes, filter)?
                    .iter()
                    .map(tree_to_perm)
                    .collect::<Result<_, _>>()?,
            };
            perms.sort();
            perms.iter().map(Record::perm).collect()
        }
    };
    if count_only {
        let name = match object {
            Object::Trees => "trees",
            Object::Maps => "maps",
            Object::Perms => "perms",
        };
        return match format {
            Format::Text => Ok(writeln!(out, "{}", records.len())?),
            Format::Json => Ok(writeln!(
                out,
                "{}",
                json!({"object": name, "size": size, "count": records.len()})
            )?),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["object", "size", "count"])?;
                w.write_record([name, &size.to_string(), &records.len().to_string()])?;
                Ok(w.flush()?)
            }
        };
    }
    write_records(format, &records, out)
}

/// One stream object in the three encodings.
struct Record {
    key: &'static str,
    text: String,
    json: Value,
}

impl Record {
    fn tree(t: &LabeledTree) -> Self {
        let text = format_tree(t);
        Record {
            key: "tree",
            json: json!({ "tree": text }),
            text,
        }
    }

    fn perm(p: &Permutation) -> Self {
        Record {
            key: "perm",
            text: p.to_string(),
            json: json!({ "perm": p.values() }),
        }
    }

    fn map(m: &CombinatorialMap) -> Self {
        let text = format_map(m);
        Record {
            key: "map",
            json: serde_json::from_str(&text).expect("map text is JSON"),
            text,
        }
    }
}

fn write_records(format: Format, records: &[Record], out: &mut impl Write) -> Outcome {
    match format {
        Format::Text => {
            for r in records {
                writeln!(out, "{}", r.text)?;
            }
        }
        Format::Json => {
            for r in records {
                writeln!(out, "{}", r.json)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record([first.key])?;
            }
            for r in records {
                w.write_record([&r.text])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses one input line: the text form, or a JSON record as written by
/// `--format json`.
fn parse_line(kind: Kind, line: &str) -> Result<Input, Error> {
    let json_field = |key: &str| -> Result<Option<Value>, Error> {
        if !line.starts_with('{') {
            return Ok(None);
        }
        let v: Value = serde_json::from_str(line).map_err(|e| Error::Parse {
            pos: e.column().saturating_sub(1),
            msg: e.to_string(),
        })?;
        Ok(v.get(key).cloned())
    };
    Ok(match kind {
        Kind::Tree => match json_field("tree")? {
            Some(Value::String(s)) => Input::Tree(parse_tree(&s)?),
            Some(_) => return Err(Error::Parse { pos: 0, msg: "\"tree\" must be a string".into() }),
            None => Input::Tree(parse_tree(line)?),
        },
        Kind::Perm => match json_field("perm")? {
            Some(v) => {
                let values: Vec<u32> = serde_json::from_value(v).map_err(|e| Error::Parse {
                    pos: 0,
                    msg: e.to_string(),
                })?;
                Input::Perm(Permutation::new(values)?)
            }
            None => Input::Perm(line.parse()?),
        },
        Kind::Map => Input::Map(parse_map(line)?),
    })
}

enum Input {
    Tree(LabeledTree),
    Perm(Permutation),
    Map(CombinatorialMap),
}

/// Non-empty stdin lines with their 1-based line numbers.
fn input_lines() -> impl Iterator<Item = Result<(usize, String), Failure>> {
    io::stdin()
        .lock()
        .lines()
        .enumerate()
        .filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l.trim().to_string()))),
            Err(e) => Some(Err(e.into())),
        })
}

fn at_line(n: usize) -> impl Fn(Error) -> Failure {
    move |e| Failure::Input(format!("line {n}: {e}"))
}

fn biject(format: Format, from: Kind, to: Kind, out: &mut impl Write) -> Outcome {
    if from == Kind::Map {
        return Err(Failure::Input("--from accepts tree or perm".into()));
    }
    let mut records = Vec::new();
    for line in input_lines() {
        let (n, line) = line?;
        let tree = match parse_line(from, &line).map_err(at_line(n))? {
            Input::Tree(t) => {
                t.validate().map_err(|v| at_line(n)(Error::InvalidTree(v.to_string())))?;
                t
            }
            Input::Perm(p) => perm_to_tree(&p).map_err(at_line(n))?,
            Input::Map(_) => unreachable!("maps are rejected above"),
        };
        let record = match to {
            Kind::Tree => Record::tree(&tree),
            Kind::Map => Record::map(&tree_to_map(&tree).map_err(at_line(n))?),
            Kind::Perm => Record::perm(&tree_to_perm(&tree).map_err(at_line(n))?),
        };
        records.push(record);
    }
    write_records(format, &records, out)
}

type Fields = Vec<(&'static str, Value)>;

fn tree_fields(t: &LabeledTree) -> Result<Fields, Error> {
    let s = tree_stats(t)?;
    Ok(vec![
        ("tree", json!(format_tree(t))),
        ("nodes", json!(s.nodes)),
        ("leaves", json!(s.leaves)),
        ("internal_nodes", json!(s.internal_nodes)),
        ("root_label", json!(s.root_label)),
        ("single_child_max_nodes", json!(s.single_child_max_nodes)),
        ("decomposable", json!(s.decomposable)),
        ("primitive", json!(is_primitive_tree(t)?)),
        ("two_face_free", json!(is_k_face_free_tree(t, 2)?)),
        ("three_face_free", json!(is_k_face_free_tree(t, 3)?)),
        ("four_face_free", json!(is_k_face_free_tree(t, 4)?)),
        ("mef_necessary", json!(mef_necessary(t)?)),
        ("no_only_children", json!(has_no_only_children(t)?)),
    ])
}

fn map_fields(m: &CombinatorialMap) -> Result<Fields, Error> {
    let report = faces(m)?;
    let degrees: Vec<String> = report
        .degree_histogram
        .iter()
        .map(|(d, c)| format!("{d}:{c}"))
        .collect();
    let code: String = canonical_code(m)?.0.iter().map(|b| format!("{b:02x}")).collect();
    Ok(vec![
        ("edges", json!(m.edge_count())),
        ("vertices", json!(m.vertex_count())),
        ("faces", json!(report.faces.len())),
        ("root_face_degree", json!(report.root_face().degree)),
        ("internal_2faces", json!(internal_2face_count(m)?)),
        ("face_degrees", json!(degrees.join(" "))),
        ("nonseparable", json!(is_nonseparable(m)?)),
        ("multiple_edges", json!(has_multiple_edges(m)?)),
        ("canonical_code", json!(code)),
    ])
}

fn perm_fields(p: &Permutation) -> Fields {
    let member = in_class(p);
    vec![
        ("perm", json!(p.to_string())),
        ("length", json!(p.len())),
        ("left_to_right_maxima", json!(p.left_to_right_maxima().len())),
        ("components", json!(p.components().len())),
        ("indecomposable", json!(p.is_indecomposable())),
        ("in_class", json!(member)),
        ("m_occurrences", json!(m_count(p))),
        ("primitive", if member { json!(m_count(p) == 0) } else { Value::Null }),
    ]
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn write_fields(format: Format, rows: &[Fields], out: &mut impl Write) -> Outcome {
    match format {
        Format::Text => {
            for row in rows {
                let parts: Vec<String> = row
                    .iter()
                    .map(|(k, v)| match v {
                        Value::String(s) if s.contains(' ') => format!("{k}=\"{s}\""),
                        _ => format!("{k}={}", scalar_text(v)),
                    })
                    .collect();
                writeln!(out, "{}", parts.join(" "))?;
            }
        }
        Format::Json => {
            for row in rows {
                let obj: serde_json::Map<String, Value> =
                    row.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
                writeln!(out, "{}", Value::Object(obj))?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = rows.first() {
                w.write_record(first.iter().map(|(k, _)| *k))?;
            }
            for row in rows {
                w.write_record(row.iter().map(|(_, v)| scalar_text(v)))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn stats(format: Format, kind: Kind, out: &mut impl Write) -> Outcome {
    let mut rows = Vec::new();
    for line in input_lines() {
        let (n, line) = line?;
        let fields = match parse_line(kind, &line).map_err(at_line(n))? {
            Input::Tree(t) => tree_fields(&t).map_err(at_line(n))?,
            Input::Map(m) => map_fields(&m).map_err(at_line(n))?,
            Input::Perm(p) => perm_fields(&p),
        };
        rows.push(fields);
    }
    write_fields(format, &rows, out)
}

fn series_cmd(format: Format, name: SeriesName, terms: usize, out: &mut impl Write) -> Outcome {
    if terms == 0 || terms > MAX_SERIES_TERMS {
        return Err(out_of_range("terms", terms, format!("1..={MAX_SERIES_TERMS}")));
    }
    match format {
        Format::Text => {
            let s = series(name, terms)?;
            write!(out, "{}", s.format_lines())?;
        }
        Format::Json => {
            let s = series(name, terms)?;
            let coeffs: Vec<String> = s.coeffs().iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", json!({"name": name.to_string(), "terms": terms, "coefficients": coeffs}))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "coefficient", "asymptotic", "relative_error"])?;
            for row in csv_rows(name, terms)? {
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn asympt(format: Format, name: AsymptoticName, at: usize, out: &mut impl Write) -> Outcome {
    if at == 0 || at > MAX_ASYMPT_INDEX {
        return Err(out_of_range("index", at, format!("1..={MAX_ASYMPT_INDEX}")));
    }
    let estimate = asymptotic(name, at)?;
    let exact = reference_coefficient(name, at);
    let err = LogReal::from_bigint(&exact).map(|e| estimate.relative_error(e));
    let fields: Fields = vec![
        ("name", json!(name.to_string())),
        ("n", json!(at)),
        ("estimate", json!(estimate.to_string())),
        ("exact", json!(exact.to_string())),
        ("relative_error", err.map_or(Value::Null, |e| json!(format!("{e:.6e}")))),
    ];
    write_fields(format, &[fields], out)
}

/// Size for one suite: the request or the default, never above the
/// environment guard.
fn suite_size(suite: Suite, requested: Option<usize>, guard: Option<usize>) -> Option<usize> {
    let default = suite.default_size()?;
    let size = requested.unwrap_or(default);
    Some(guard.map_or(size, |g| size.min(g)))
}

fn size_guard() -> Result<Option<usize>, Failure> {
    match std::env::var(SIZE_GUARD_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Input(format!("{SIZE_GUARD_VAR} must be a non-negative integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Input(format!("{SIZE_GUARD_VAR}: {e}"))),
    }
}

fn verify(format: Format, choice: SuiteChoice, max_size: Option<usize>, out: &mut impl Write) -> Outcome {
    let guard = size_guard()?;
    let suites: Vec<Suite> = match choice {
        SuiteChoice::One(s) => vec![s],
        SuiteChoice::All => Suite::ALL.to_vec(),
    };
    let verifier = Verifier::default();
    let mut reports: Vec<VerificationReport> = Vec::new();
    for s in suites {
        reports.push(verifier.run(s, suite_size(s, max_size, guard))?);
    }
    match format {
        Format::Text => {
            for r in &reports {
                write!(out, "{r}")?;
            }
        }
        Format::Json => {
            for r in &reports {
                writeln!(out, "{}", r.to_json())?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["suite", "params", "status", "failures", "runtime_secs"])?;
            for r in &reports {
                let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                w.write_record([
                    r.suite.clone(),
                    params.join(" "),
                    if r.passed() { "pass".into() } else { "fail".into() },
                    r.failures.to_string(),
                    format!("{:.3}", r.runtime_secs),
                ])?;
            }
            w.flush()?;
        }
    }
    if reports.iter().all(VerificationReport::passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_parse() {
        assert_eq!("primitive".parse::<Filter>(), Ok(Filter::Primitive));
        assert_eq!("k-face-free=3".parse::<Filter>(), Ok(Filter::KFaceFree(3)));
        assert_eq!("labels-max=2".parse::<Filter>(), Ok(Filter::LabelsMax(2)));
        assert!("k-face-free=5".parse::<Filter>().is_err());
        assert!("labels-max=0".parse::<Filter>().is_err());
        assert!("labels-max=x".parse::<Filter>().is_err());
        assert!("prime".parse::<Filter>().is_err());
    }

    #[test]
    fn guard_only_lowers_sizes() {
        assert_eq!(suite_size(Suite::Table1, None, None), Some(9));
        assert_eq!(suite_size(Suite::Table1, None, Some(5)), Some(5));
        assert_eq!(suite_size(Suite::Table1, None, Some(50)), Some(9));
        assert_eq!(suite_size(Suite::Table1, Some(10), Some(7)), Some(7));
        assert_eq!(suite_size(Suite::Asymptotics, Some(3), Some(2)), None);
    }
}
