//! The `nlflow` command line.

pub mod data;
pub mod script;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use nlflow_core::dataflow::{Diagram, NodeKind};
use nlflow_core::demo::{self, Renaming};
use nlflow_core::parser::{self, read_examples, TrainConfig, Weights};
use nlflow_core::suite::{read_suite, rename_query, run_suite, Outcome};
use nlflow_core::tagger::TagContext;
use nlflow_core::{Engine, Error, ErrorCategory, ErrorReport, QueryOptions, ResourcePaths, Session};

#[derive(Debug, Parser)]
#[command(name = "nlflow", version, about = "Natural-language commands for dataflow diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Resources {
    /// Grammar file replacing the bundled one.
    #[arg(long, env = "NLFLOW_GRAMMAR")]
    pub grammar: Option<PathBuf>,
    /// Ranker weights file replacing the bundled one.
    #[arg(long, env = "NLFLOW_WEIGHTS")]
    pub weights: Option<PathBuf>,
    /// Autocomplete template file replacing the bundled one.
    #[arg(long, env = "NLFLOW_TEMPLATES")]
    pub templates: Option<PathBuf>,
}

impl Resources {
    fn engine(&self) -> Result<Engine, Failure> {
        Ok(Engine::load(&ResourcePaths {
            grammar: self.grammar.clone(),
            weights: self.weights.clone(),
            templates: self.templates.clone(),
        })?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tag, parse and complete one query without executing it.
    Parse {
        query: String,
        /// Table file to load; a data source node is added if the diagram
        /// has none for it. Repeatable.
        #[arg(long)]
        data: Vec<PathBuf>,
        /// Diagram document to query against.
        #[arg(long)]
        diagram: Option<PathBuf>,
        #[command(flatten)]
        resources: Resources,
        #[arg(long)]
        json: bool,
    },
    /// Run a query script against one session.
    Run {
        script: PathBuf,
        /// Directory of .csv/.tsv tables (or a single table file).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Where to write the final diagram; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        resources: Resources,
    },
    /// Run a regression suite against the built-in fixtures.
    Test {
        suite: PathBuf,
        /// Rename every column and node label in fixtures and queries first.
        #[arg(long)]
        rename: bool,
        #[command(flatten)]
        resources: Resources,
    },
    /// Train ranker weights from query/signature examples.
    Train {
        examples: PathBuf,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Diagram providing the tagging context; the demo diagram if omitted.
        #[arg(long)]
        diagram: Option<PathBuf>,
        #[arg(long, env = "NLFLOW_GRAMMAR")]
        grammar: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "NLFLOW_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "NLFLOW_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Tables registered in every new session.
        #[arg(long, env = "NLFLOW_DATA")]
        data: Option<PathBuf>,
        /// Idle seconds before a session is dropped.
        #[arg(long, env = "NLFLOW_SESSION_TTL", default_value_t = 1800)]
        ttl: u64,
        #[command(flatten)]
        resources: Resources,
    },
}

/// A failed command: its exit code and message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::new(1, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new(1, e.to_string())
    }
}

/// 2 for grammar rejections, 3 for queries that do not fit the diagram,
/// 1 otherwise.
pub fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::ParseRejected
        | ErrorCategory::NotSupported
        | ErrorCategory::NotImplemented
        | ErrorCategory::TaggingError
        | ErrorCategory::Composite => 2,
        ErrorCategory::ContextInvalid | ErrorCategory::OptionsError => 3,
        ErrorCategory::Internal => 1,
    }
}

impl From<ErrorReport> for Failure {
    fn from(r: ErrorReport) -> Failure {
        Failure::new(exit_code(r.category), format!("{}: {}", r.category, r.message))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

/// Runs a parsed command line, writing normal output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Parse {
            query,
            data,
            diagram,
            resources,
            json,
        } => parse(&query, &data, diagram.as_deref(), &resources, json, out),
        Command::Run {
            script,
            data,
            out: target,
            resources,
        } => run(&script, data.as_deref(), target.as_deref(), &resources, out),
        Command::Test {
            suite,
            rename,
            resources,
        } => test(&suite, rename, &resources, out),
        Command::Train {
            examples,
            epochs,
            lr,
            seed,
            out: target,
            diagram,
            grammar,
        } => {
            let config = TrainConfig {
                epochs,
                learning_rate: lr,
                seed,
                ..TrainConfig::default()
            };
            train(&examples, &config, &target, diagram.as_deref(), grammar.as_deref(), out)
        }
        Command::Serve {
            port,
            host,
            data,
            ttl,
            resources,
        } => serve(&host, port, data.as_deref(), Duration::from_secs(ttl), &resources, out),
    }
}

fn parse(
    query: &str,
    data: &[PathBuf],
    diagram: Option<&Path>,
    resources: &Resources,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let engine = resources.engine()?;
    let mut d = match diagram {
        Some(p) => Diagram::load(&read(p)?).map_err(|e| Failure::new(1, format!("{}: {e}", p.display())))?,
        None => Diagram::new(),
    };
    for path in data {
        let table = data::load_table(path)?;
        let name = table.name.clone();
        if d.dataset(&name).is_none() {
            d.add_dataset(table)?;
        }
        let has_source = d
            .nodes()
            .any(|n| matches!(&n.kind, NodeKind::DataSource { table } if *table == name));
        if !has_source {
            d.add_node(NodeKind::DataSource { table: name }, None, None)?;
        }
    }
    let session = Session::new(d);
    let result = engine.interpret(&session, query, &QueryOptions::default());
    if json {
        let value = match &result {
            Ok(i) => serde_json::json!({
                "accepted": true,
                "tagSpans": i.tagged.tag_spans,
                "derivations": i.derivations.iter().map(|d| serde_json::json!({
                    "signature": d.signature(),
                    "score": d.score,
                    "frames": d.frames,
                })).collect::<Vec<_>>(),
                "chosen": i.chosen,
                "completion": i.command,
            }),
            Err(r) => serde_json::json!({
                "accepted": false,
                "tagSpans": engine.tag(&session.diagram, query).tag_spans,
                "error": r,
            }),
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json encodes"))?;
    } else {
        let tagged = match &result {
            Ok(i) => i.tagged.clone(),
            Err(_) => engine.tag(&session.diagram, query),
        };
        writeln!(out, "tags:")?;
        for s in &tagged.tag_spans {
            let words: Vec<&str> = tagged.tokens[s.start..s.end].iter().map(|t| t.text.as_str()).collect();
            let mark = if s.suppressed { " (suppressed)" } else { "" };
            writeln!(
                out,
                "  {:?} -> {:?} {} ratio {:.2}{mark}",
                words.join(" "),
                s.category,
                s.value,
                s.ratio
            )?;
        }
        if let Ok(i) = &result {
            writeln!(out, "frames:")?;
            for (n, d) in i.derivations.iter().enumerate() {
                let mark = if n == i.chosen { "*" } else { " " };
                writeln!(out, " {mark}{:>3}  {:>8.3}  {}", n + 1, d.score, d.signature())?;
            }
            writeln!(out, "completion:")?;
            for step in &i.command.steps {
                writeln!(out, "  {}", serde_json::to_string(step).expect("json encodes"))?;
            }
        }
    }
    result.map(|_| ()).map_err(Failure::from)
}

fn run(
    script: &Path,
    data: Option<&Path>,
    target: Option<&Path>,
    resources: &Resources,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let engine = resources.engine()?;
    let text = read(script)?;
    let lines = script::read_script(&text).map_err(|(n, msg)| Failure::new(1, format!("line {n}: {msg}")))?;
    let mut d = Diagram::new();
    if let Some(dir) = data {
        for t in data::load_tables(dir)? {
            d.add_dataset(t)?;
        }
    }
    let mut session = Session::new(d);
    let mut log = String::new();
    let result = script::run_lines(&engine, &mut session, &lines, |s| {
        let _ = match &s.signature {
            Some(sig) => writeln!(log, "{:>4}  {}  =>  {sig}  (+{} nodes)", s.line, s.text, s.created),
            None => writeln!(log, "{:>4}  {}", s.line, s.text),
        };
    });
    match target {
        Some(_) => out.write_all(log.as_bytes())?,
        None => eprint!("{log}"),
    }
    if let Err(e) = result {
        let f = Failure::from(e.report);
        return Err(Failure::new(f.code, format!("line {}: {}", e.line, f.message)));
    }
    let doc = session.diagram.save();
    match target {
        Some(p) => write_file(p, &doc)?,
        None => writeln!(out, "{doc}")?,
    }
    Ok(())
}

/// The renamed suite queries, keyed to the same fixtures.
fn renamed_cases(engine: &Engine, cases: &mut [nlflow_core::suite::Case], renaming: &Renaming) {
    for c in cases {
        c.query = rename_query(engine, c.fixture, &c.query, renaming);
    }
}

fn failed(o: &Outcome) -> bool {
    !o.passed || !o.transactional || o.history_ok == Some(false)
}

fn test(suite: &Path, rename: bool, resources: &Resources, out: &mut dyn Write) -> Result<(), Failure> {
    let engine = resources.engine()?;
    let mut cases = read_suite(&read(suite)?)?;
    let renaming = if rename {
        demo::alternate_names()
    } else {
        Renaming::default()
    };
    if rename {
        renamed_cases(&engine, &mut cases, &renaming);
    }
    let outcomes = run_suite(&engine, &cases, &renaming);
    writeln!(out, "{:<6} {:>5}  {:<8} query", "result", "line", "fixture")?;
    for o in &outcomes {
        let verdict = if failed(o) { "FAIL" } else { "pass" };
        writeln!(
            out,
            "{verdict:<6} {:>5}  {:<8} {}",
            o.case.line,
            o.case.fixture.name(),
            o.case.query
        )?;
        if failed(o) {
            writeln!(out, "{:>16} expected {}", "", o.case.expect)?;
            writeln!(out, "{:>16} actual   {}", "", o.actual)?;
            if let Some(n) = o.case.nodes.filter(|n| *n != o.node_delta) {
                writeln!(out, "{:>16} nodes    {:+} (expected {n:+})", "", o.node_delta)?;
            }
            if !o.transactional {
                writeln!(out, "{:>16} the failed query changed the diagram", "")?;
            }
            if o.history_ok == Some(false) {
                writeln!(out, "{:>16} undo/redo did not restore the diagram", "")?;
            }
        }
    }
    let failures = outcomes.iter().filter(|o| failed(o)).count();
    writeln!(
        out,
        "{} passed, {failures} failed, {} total",
        outcomes.len() - failures,
        outcomes.len()
    )?;
    if failures > 0 {
        return Err(Failure::new(1, format!("{failures} suite case(s) failed")));
    }
    Ok(())
}

fn train(
    examples: &Path,
    config: &TrainConfig,
    target: &Path,
    diagram: Option<&Path>,
    grammar: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let engine = Engine::load(&ResourcePaths {
        grammar: grammar.map(Path::to_path_buf),
        ..ResourcePaths::default()
    })?;
    let examples = read_examples(&read(examples)?)?;
    let d = match diagram {
        Some(p) => Diagram::load(&read(p)?)?,
        None => demo::base_diagram(),
    };
    let context = TagContext::from_diagram(&d);
    let tagger = &engine.config.tagger;
    let initial = Weights::zero();
    let before = parser::accuracy(
        &engine.parser,
        &examples,
        &context,
        tagger,
        &engine.lexicon,
        &initial,
        config.beam,
    );
    let report = parser::train(
        &engine.parser,
        &examples,
        &context,
        tagger,
        &engine.lexicon,
        initial,
        config,
    )?;
    write_file(target, &report.weights.to_text())?;
    writeln!(out, "examples:       {}", examples.len())?;
    writeln!(out, "accuracy before {before:.3}")?;
    writeln!(out, "accuracy after  {:.3}", report.accuracy)?;
    writeln!(out, "epochs {}, updates {}", report.epochs_run, report.updates)?;
    writeln!(out, "wrote {}", target.display())?;
    Ok(())
}

fn serve(
    host: &str,
    port: u16,
    data: Option<&Path>,
    ttl: Duration,
    resources: &Resources,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let engine = resources.engine()?;
    let tables = match data {
        Some(dir) => data::load_tables(dir)?,
        None => Vec::new(),
    };
    let listener = std::net::TcpListener::bind((host, port))
        .map_err(|e| Failure::new(1, format!("cannot bind {host}:{port}: {e}")))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    writeln!(out, "listening on http://{addr}")?;
    out.flush()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        nlflow_service::serve(listener, nlflow_service::AppState::new(engine, tables, ttl)).await
    })?;
    Ok(())
}
