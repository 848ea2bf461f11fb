//! Command-line front end for `compeval-core`.
//!
//! [`run`] takes the argument vector and two writers so tests can drive the
//! whole surface in-process. Exit codes: 0 success, 1 validation or
//! evaluation error, 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use compeval_core::integrators::compat_extended_poset;
use compeval_core::multiset::{build_scale_poset, enumerate_count_vectors};
use compeval_core::poset::cumulative_dominates;
use compeval_core::system::{
    enumerate_compositions, validate_model_with, Composition, MethodChoice, RankReport, ValidationOptions,
    DEFAULT_COMPOSITION_LIMIT,
};
use compeval_core::{
    evaluate, export_dot, fmt_real, load_model, rank, Evaluation, Method, Metric, PosetView, Reduction, Scale,
    SystemModel, TopsisConfig,
};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "compeval",
    version,
    about = "Evaluate and rank compositions of hierarchical systems"
)]
struct Cli {
    /// Emit structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Distance for multiset medians.
    #[arg(long, global = true, value_name = "cumL1|hasse")]
    metric: Option<Metric>,
    /// Upper bound on enumerated compositions.
    #[arg(long, global = true, value_name = "N")]
    limit: Option<usize>,
    #[command(flatten)]
    monotone: MonotoneFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct MonotoneFlags {
    /// Treat non-monotone integration tables as errors (default).
    #[arg(long, global = true, conflicts_with = "warn_monotone")]
    strict_monotone: bool,
    /// Report non-monotone integration tables as warnings only.
    #[arg(long, global = true)]
    warn_monotone: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file.
    Validate { model: PathBuf },
    /// Evaluate one named composition.
    Evaluate {
        model: PathBuf,
        #[arg(long)]
        composition: String,
        /// Method for every internal node; defaults to the model's bindings.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Rank compositions.
    Rank {
        model: PathBuf,
        /// Method for every internal node; defaults to the model's bindings.
        #[arg(long)]
        method: Option<Method>,
        /// How evaluations become priorities.
        #[arg(long, value_name = "layers|labelD|closeness")]
        reduce: Reduction,
        /// Rank every composition instead of the named ones.
        #[arg(long)]
        all: bool,
        /// Named TOPSIS reference points for `--reduce closeness`.
        #[arg(long, value_name = "ID")]
        topsis: Option<String>,
    },
    /// Print or export the poset of a scale.
    Poset {
        model: PathBuf,
        #[arg(long)]
        scale: String,
        /// DOT output path, `-` for stdout.
        #[arg(long, value_name = "PATH")]
        dot: Option<String>,
        /// Combine a multiset scale with a compatibility scale 1..=nu.
        #[arg(long)]
        nu: Option<u32>,
    },
    /// Integration table checks.
    Tables {
        #[command(subcommand)]
        command: TablesCommand,
    },
}

#[derive(Debug, Subcommand)]
enum TablesCommand {
    /// Check density and monotonicity of every table.
    Check { model: PathBuf },
}

/// Failure carrying an exit code; the message is already single-line.
struct Failure {
    code: i32,
    lines: Vec<String>,
}

impl Failure {
    fn one(msg: impl ToString) -> Self {
        Self {
            code: 1,
            lines: vec![msg.to_string()],
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(f) => {
            for l in &f.lines {
                let _ = writeln!(err, "error: {}", l.replace('\n', " "));
            }
            f.code
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let opts = ValidationOptions {
        warn_monotone: cli.monotone.warn_monotone,
    };
    match &cli.command {
        Command::Validate { model } => cmd_validate(cli, &load(model, cli)?, opts, out),
        Command::Evaluate {
            model,
            composition,
            method,
        } => {
            let m = load_valid(model, cli, opts, out)?;
            cmd_evaluate(cli, &m, composition, *method, out)
        }
        Command::Rank {
            model,
            method,
            reduce,
            all,
            topsis,
        } => {
            let m = load_valid(model, cli, opts, out)?;
            cmd_rank(cli, &m, *method, *reduce, *all, topsis.as_deref(), out)
        }
        Command::Poset { model, scale, dot, nu } => cmd_poset(cli, &load(model, cli)?, scale, dot.as_deref(), *nu, out),
        Command::Tables {
            command: TablesCommand::Check { model },
        } => cmd_tables(cli, &load(model, cli)?, opts, out),
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure::one(format!("write failed: {e}"))
}

fn load(path: &Path, cli: &Cli) -> Result<SystemModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::one(format!("{}: {e}", path.display())))?;
    let mut m = load_model(&text).map_err(|errs| Failure {
        code: 1,
        lines: errs.iter().map(|e| format!("{}: {e}", path.display())).collect(),
    })?;
    if let Some(metric) = cli.metric {
        m.metric = metric;
    }
    Ok(m)
}

fn load_valid(path: &Path, cli: &Cli, opts: ValidationOptions, out: &mut dyn Write) -> Result<SystemModel, Failure> {
    let m = load(path, cli)?;
    let report = validate_model_with(&m, opts);
    if !report.is_ok() {
        return Err(Failure {
            code: 1,
            lines: report.violations.iter().map(ToString::to_string).collect(),
        });
    }
    if !cli.json {
        for w in &report.warnings {
            writeln!(out, "warning: {w}").map_err(io_fail)?;
        }
    }
    Ok(m)
}

fn notes(cli: &Cli, m: &SystemModel, out: &mut dyn Write) -> Outcome {
    if !cli.json {
        for n in &m.notes {
            writeln!(out, "# {n}").map_err(io_fail)?;
        }
    }
    Ok(())
}

fn emit_json(out: &mut dyn Write, v: &serde_json::Value) -> Outcome {
    writeln!(out, "{v}").map_err(io_fail)
}

fn cmd_validate(cli: &Cli, m: &SystemModel, opts: ValidationOptions, out: &mut dyn Write) -> Outcome {
    let report = validate_model_with(m, opts);
    if cli.json {
        emit_json(out, &json!({ "model": m.name, "ok": report.is_ok(), "report": report }))?;
    } else {
        notes(cli, m, out)?;
        for w in &report.warnings {
            writeln!(out, "warning: {w}").map_err(io_fail)?;
        }
        for v in &report.violations {
            writeln!(out, "violation: {v}").map_err(io_fail)?;
        }
        if report.is_ok() {
            writeln!(out, "ok").map_err(io_fail)?;
        }
    }
    if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::one(format!(
            "{}: {} violation(s)",
            m.name,
            report.violations.len()
        )))
    }
}

fn counts(xs: &[u32]) -> String {
    let parts: Vec<String> = xs.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

/// Single-token rendering of an evaluation.
pub fn render(e: &Evaluation) -> String {
    match e {
        Evaluation::Quantity { value, .. } => fmt_real(*value),
        Evaluation::Level { level, .. } => level.to_string(),
        Evaluation::Vector { value, .. } => {
            let parts: Vec<String> = value.iter().map(|x| fmt_real(*x)).collect();
            format!("({})", parts.join(","))
        }
        Evaluation::Counts { eta } => counts(eta),
        Evaluation::Quality { w, eta } => {
            let parts: Vec<String> = eta.iter().map(u32::to_string).collect();
            format!("({w};{})", parts.join(","))
        }
        Evaluation::Multiset { eta } => eta.to_string(),
        Evaluation::Median(r) => r.representative.to_string(),
    }
}

fn median_detail(e: &Evaluation) -> Option<String> {
    let Evaluation::Median(r) = e else { return None };
    let set: Vec<String> = r.argmin_set.iter().map(ToString::to_string).collect();
    let mut s = format!("argmin={} total={}", set.join(","), r.total_distance);
    if r.tie_broken {
        s.push_str(" tie-broken");
    }
    Some(s)
}

fn cmd_evaluate(cli: &Cli, m: &SystemModel, name: &str, method: Option<Method>, out: &mut dyn Write) -> Outcome {
    let comp = m
        .composition(name)
        .ok_or_else(|| Failure::one(format!("unknown composition `{name}`")))?;
    let e = evaluate(m, comp, method).map_err(Failure::one)?;
    if cli.json {
        return emit_json(
            out,
            &json!({
                "composition": name,
                "selection": comp.label(),
                "method": method.map(|x| x.to_string()),
                "evaluation": e,
            }),
        );
    }
    notes(cli, m, out)?;
    writeln!(out, "{}", render(&e)).map_err(io_fail)?;
    if let Some(d) = median_detail(&e) {
        writeln!(out, "{d}").map_err(io_fail)?;
    }
    Ok(())
}

fn cmd_rank(
    cli: &Cli,
    m: &SystemModel,
    method: Option<Method>,
    reduce: Reduction,
    all: bool,
    topsis: Option<&str>,
    out: &mut dyn Write,
) -> Outcome {
    let limit = cli.limit.unwrap_or(DEFAULT_COMPOSITION_LIMIT);
    let (comps, truncated): (Vec<(String, Composition)>, bool) = if all || m.compositions.is_empty() {
        let e = enumerate_compositions(m, limit);
        (
            e.compositions.into_iter().map(|c| (c.label(), c)).collect(),
            e.truncated,
        )
    } else {
        (m.compositions.clone(), false)
    };
    let cfg: Option<&TopsisConfig> = match topsis {
        None => None,
        Some(id) => Some(
            m.topsis
                .get(id)
                .ok_or_else(|| Failure::one(format!("unknown TOPSIS configuration `{id}`")))?,
        ),
    };
    let report = rank(m, &comps, MethodChoice::from(method), reduce, cfg).map_err(Failure::one)?;
    if cli.json {
        return emit_json(
            out,
            &json!({
                "method": method.map(|x| x.to_string()),
                "truncated": truncated,
                "report": report,
            }),
        );
    }
    notes(cli, m, out)?;
    if truncated {
        writeln!(out, "# truncated after {limit} compositions").map_err(io_fail)?;
    }
    write_rank(&report, out).map_err(io_fail)
}

fn write_rank(report: &RankReport, out: &mut dyn Write) -> std::io::Result<()> {
    for e in &report.entries {
        write!(out, "r({})={}", e.name, e.priority)?;
        if let Some(l) = e.label {
            write!(out, "\t{l}")?;
        }
        if let Some(t) = e.topsis {
            write!(
                out,
                "\tcloseness={}\trho+={}\trho-={}",
                fmt_real(t.closeness),
                fmt_real(t.rho_plus),
                fmt_real(t.rho_minus)
            )?;
        }
        write!(out, "\t{}", render(&e.evaluation))?;
        if let Evaluation::Median(r) = &e.evaluation {
            if r.tie_broken {
                write!(out, "\ttie-broken")?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

fn cmd_poset(cli: &Cli, m: &SystemModel, id: &str, dot: Option<&str>, nu: Option<u32>, out: &mut dyn Write) -> Outcome {
    let scale = m
        .scales
        .get(id)
        .ok_or_else(|| Failure::one(format!("unknown scale `{id}`")))?;
    let (text, nodes, edges) = match (scale, nu) {
        (Scale::Multiset(s), Some(nu)) => {
            if nu == 0 {
                return Err(Failure::one("--nu must be at least 1"));
            }
            let v = compat_extended_poset(s, nu);
            (export_dot(&v, id), v.len(), v.covers().len())
        }
        (_, Some(_)) => return Err(Failure::one("--nu applies to multiset scales only")),
        (Scale::Multiset(s), None) => {
            let v = build_scale_poset(s).view;
            (export_dot(&v, id), v.len(), v.covers().len())
        }
        (Scale::CountPoset(s), None) => {
            let v = PosetView::new(
                enumerate_count_vectors(s.levels, s.elements)
                    .into_iter()
                    .map(CountVector)
                    .collect(),
                |a: &CountVector, b: &CountVector| cumulative_dominates(&a.0, &b.0),
            );
            (export_dot(&v, id), v.len(), v.covers().len())
        }
        (Scale::Ordinal(o), None) => {
            let v = PosetView::new((1..=o.size).collect::<Vec<u32>>(), |a, b| a < b);
            (export_dot(&v, id), v.len(), v.covers().len())
        }
        (other, None) => {
            return Err(Failure::one(format!(
                "no finite poset for {} scale `{id}`",
                other.kind_name()
            )))
        }
    };
    match dot {
        Some("-") => out.write_all(text.as_bytes()).map_err(io_fail),
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::one(format!("{path}: {e}")))?;
            summary(cli, id, nodes, edges, out)
        }
        None => summary(cli, id, nodes, edges, out),
    }
}

struct CountVector(Vec<u32>);

impl std::fmt::Display for CountVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&counts(&self.0))
    }
}

fn summary(cli: &Cli, id: &str, nodes: usize, edges: usize, out: &mut dyn Write) -> Outcome {
    if cli.json {
        emit_json(out, &json!({ "scale": id, "nodes": nodes, "covers": edges }))
    } else {
        writeln!(out, "{id}\tnodes={nodes}\tcovers={edges}").map_err(io_fail)
    }
}

fn cmd_tables(cli: &Cli, m: &SystemModel, opts: ValidationOptions, out: &mut dyn Write) -> Outcome {
    let mut errors = 0usize;
    let mut records = vec![];
    for (node, table) in &m.tables {
        let issues = table.issues();
        let (warn, err): (Vec<_>, Vec<_>) = issues
            .into_iter()
            .partition(|i| i.is_monotonicity() && opts.warn_monotone);
        errors += err.len();
        if cli.json {
            records.push(json!({ "node": node, "errors": err, "warnings": warn }));
            continue;
        }
        for i in &warn {
            writeln!(out, "warning: {node}: {i}").map_err(io_fail)?;
        }
        for i in &err {
            writeln!(out, "violation: {node}: {i}").map_err(io_fail)?;
        }
        if err.is_empty() {
            let cells = table.cells().count();
            writeln!(out, "ok {node}\tcells={cells}").map_err(io_fail)?;
        }
    }
    if cli.json {
        emit_json(out, &json!({ "tables": records }))?;
    }
    if errors == 0 {
        Ok(())
    } else {
        Err(Failure::one(format!("{}: {errors} table issue(s)", m.name)))
    }
}
