use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use inld_core::parsekit::{Edit, KnowledgeBase};
use inld_core::session::{
    drive, render_transcript, DiagnosisReport, GoldInterpretation, InteractiveAgent, OracleAgent, ReportStatus,
    ScriptedAgent, UserAgent,
};
use inld_core::strategies::Diagnoser;

use crate::api::ServiceConfig;
use crate::bench::{render_table, run_table2, BenchResult};
use crate::model_export;

#[derive(Debug, Parser)]
#[command(name = "inld", version, about = "Interactive diagnosis of semantic parser knowledge gaps")]
#[command(args_conflicts_with_subcommands = true, arg_required_else_help = true)]
pub struct Cli {
    /// Start the HTTP service instead of running a command.
    #[arg(long)]
    pub serve: bool,
    #[arg(long, default_value_t = 8080, requires = "serve")]
    pub port: u16,
    /// Directory of the built web UI to host under `/`.
    #[arg(long, requires = "serve")]
    pub ui_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagnose why a sentence is misinterpreted.
    Diagnose(DiagnoseArgs),
    /// Write a copy of a KB with knowledge removed.
    Ablate {
        /// KB file, or the name of a bundled KB.
        #[arg(long)]
        kb: String,
        /// `remove_semtrans:<word>:<Concept>`, `remove_valence_patterns:<word>:<Concept>`
        /// or `remove_lexicon_entry:<surface>`; repeatable.
        #[arg(long = "edit", required = true)]
        edits: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark suite against a KB.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        kb: String,
        /// Also write the results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Table2,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// KB file, or the name of a bundled KB.
    #[arg(long)]
    pub kb: String,
    #[arg(long)]
    pub sentence: String,
    #[command(flatten)]
    pub mode: Mode,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the parse trace and model graph here.
    #[arg(long)]
    pub dump_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Mode {
    /// Ask the questions on the console.
    #[arg(long)]
    pub interactive: bool,
    /// Answer from a file, one answer per line.
    #[arg(long)]
    pub answers: Option<PathBuf>,
    /// Answer from a gold interpretation (JSON).
    #[arg(long)]
    pub oracle: Option<PathBuf>,
}

/// Reads a KB file, falling back to the bundled KB names.
pub fn load_kb(arg: &str) -> Result<KnowledgeBase, String> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| format!("{arg}: {e}"))?;
        let mut kb = KnowledgeBase::from_json(&text).map_err(|e| format!("{arg}: {e}"))?;
        if kb.name.is_empty() {
            kb.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        return Ok(kb);
    }
    KnowledgeBase::named(arg).map_err(|_| format!("{arg}: no such file or bundled KB"))
}

pub struct Io<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli, io: Io<'_>) -> i32 {
    if cli.serve {
        let config = ServiceConfig { ui_dir: cli.ui_dir, ..ServiceConfig::default() };
        let rt = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => {
                let _ = writeln!(io.err, "error: {e}");
                return 2;
            }
        };
        return match rt.block_on(crate::api::serve(cli.port, config)) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(io.err, "error: {e}");
                2
            }
        };
    }
    match cli.command {
        Some(Command::Diagnose(args)) => diagnose(args, io),
        Some(Command::Ablate { kb, edits, out }) => ablate(&kb, &edits, &out, io),
        Some(Command::Bench { suite: Suite::Table2, kb, json }) => bench(&kb, json.as_deref(), io),
        None => {
            let _ = writeln!(io.err, "error: nothing to do (try --help)");
            2
        }
    }
}

fn fail(io: &mut Io<'_>, message: impl std::fmt::Display) -> i32 {
    let _ = writeln!(io.err, "error: {message}");
    2
}

fn write_fault_summary(out: &mut dyn Write, report: &DiagnosisReport) -> std::io::Result<()> {
    if report.status == ReportStatus::Partial {
        return writeln!(out, "Diagnosis incomplete after {} questions.", report.question_count);
    }
    if report.faults.is_empty() {
        return writeln!(out, "\nNo error detected.");
    }
    writeln!(out, "\nFaults:")?;
    for f in &report.faults {
        writeln!(out, "  [{}] {}", f.taxonomy_id.as_deref().unwrap_or("?"), f.description)?;
        for e in &f.evidence {
            writeln!(out, "      {e}")?;
        }
    }
    Ok(())
}

fn diagnose(args: DiagnoseArgs, mut io: Io<'_>) -> i32 {
    let kb = match load_kb(&args.kb) {
        Ok(kb) => kb,
        Err(e) => return fail(&mut io, e),
    };
    let interactive = args.mode.interactive;
    let mut engine = Diagnoser::start(&args.sentence, kb);
    let outcome = {
        let mut agent: Box<dyn UserAgent + '_> = if let Some(path) = &args.mode.answers {
            match fs::read_to_string(path) {
                Ok(text) => Box::new(ScriptedAgent::from_lines(&text)),
                Err(e) => return fail(&mut io, format!("{}: {e}", path.display())),
            }
        } else if let Some(path) = &args.mode.oracle {
            let gold = fs::read_to_string(path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<GoldInterpretation>(&t).map_err(|e| e.to_string()));
            match gold {
                Ok(g) => Box::new(OracleAgent::new(g)),
                Err(e) => return fail(&mut io, format!("{}: {e}", path.display())),
            }
        } else {
            Box::new(InteractiveAgent::new(&mut *io.input, &mut *io.out))
        };
        drive(&mut engine, agent.as_mut())
    };
    let (report, error) = match outcome {
        Ok(r) => (r, None),
        Err(e) => (*e.partial, Some(e.message)),
    };

    let finished = report.status != ReportStatus::Partial;
    if interactive {
        let faulted = finished.then_some(report.faulted_assumptions.as_slice());
        let _ = io.out.write_all(render_transcript(&[], faulted).as_bytes());
    } else {
        let _ = io.out.write_all(report.transcript_text.as_bytes());
    }
    let _ = write_fault_summary(io.out, &report);
    for w in &report.warnings {
        let _ = writeln!(io.err, "warning: {w}");
    }
    if let Some(path) = &args.report {
        if let Err(e) = fs::write(path, report.to_json()) {
            return fail(&mut io, format!("{}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.dump_model {
        let text = serde_json::to_string_pretty(&model_export(&engine)).expect("exports serialize");
        if let Err(e) = fs::write(path, text) {
            return fail(&mut io, format!("{}: {e}", path.display()));
        }
    }
    match error {
        Some(message) => fail(&mut io, message),
        None => report.exit_code(),
    }
}

fn ablate(kb: &str, edits: &[String], out: &Path, mut io: Io<'_>) -> i32 {
    let mut kb = match load_kb(kb) {
        Ok(kb) => kb,
        Err(e) => return fail(&mut io, e),
    };
    for e in edits {
        let edit: Edit = match e.parse() {
            Ok(edit) => edit,
            Err(err) => return fail(&mut io, err),
        };
        kb = match kb.ablate(&edit) {
            Ok(kb) => kb,
            Err(err) => return fail(&mut io, err),
        };
    }
    let text = serde_json::to_string_pretty(&kb).expect("KBs serialize");
    if let Err(e) = fs::write(out, text + "\n") {
        return fail(&mut io, format!("{}: {e}", out.display()));
    }
    let _ = writeln!(io.out, "wrote {} ({})", out.display(), kb.provenance.join(", "));
    0
}

fn bench(kb: &str, json: Option<&Path>, mut io: Io<'_>) -> i32 {
    let kb = match load_kb(kb) {
        Ok(kb) => kb,
        Err(e) => return fail(&mut io, e),
    };
    let results = run_table2(&kb);
    let _ = io.out.write_all(render_table(&results).as_bytes());
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&results).expect("results serialize");
        if let Err(e) = fs::write(path, text) {
            return fail(&mut io, format!("{}: {e}", path.display()));
        }
    }
    if results.iter().all(BenchResult::passed) {
        0
    } else {
        1
    }
}
