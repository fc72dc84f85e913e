//! `dsqlt check | emit | run`.
//!
//! Exit codes: 0 success, 1 script or statement error, 2 environment error
//! (unreadable input, unwritable output, no connection, bad usage).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ast::Script;
use crate::diag::Diagnostic;
use crate::emitter::{render_batch, Dialect, Emitter};
use crate::lexer::RawSource;
use crate::runner::{run_batch, ConnectionSpec, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ENV: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dsqlt",
    version,
    about = "Check, translate and run data-integration scripts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report diagnostics for each script.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the generated SQL.
    Emit(EmitArgs),
    /// Execute the generated SQL in one session.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DialectArg {
    Oracle,
    Portable,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Self {
        match d {
            DialectArg::Oracle => Dialect::OracleStyle,
            DialectArg::Portable => Dialect::Portable,
        }
    }
}

#[derive(Debug, Args)]
struct EmitArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "portable")]
    dialect: DialectArg,
    /// Write to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// End each statement with `;`.
    #[arg(long)]
    terminator: bool,
    /// One clause per line.
    #[arg(long)]
    pretty: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Locator such as `sqlite:data.db` or `sqlite::memory:`.
    #[arg(long, env = "DSQLT_CONNECT", value_name = "SPEC")]
    connect: Option<String>,
    #[arg(long, value_enum, default_value = "portable")]
    dialect: DialectArg,
    #[arg(long, overrides_with = "keep_going")]
    stop_on_error: bool,
    #[arg(long, overrides_with = "stop_on_error")]
    keep_going: bool,
    #[arg(long)]
    transactional: bool,
    /// Write one JSON record per statement to FILE.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

/// Entry point shared by the binary and tests.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ENV } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Check { paths } => cmd_check(&paths, stderr),
        Command::Emit(args) => cmd_emit(&args, stdout, stderr),
        Command::Run(args) => cmd_run(&args, stdout, stderr),
    }
}

/// Compiles every file, printing diagnostics. Returns the scripts and the
/// worst exit code seen.
fn compile_all(paths: &[PathBuf], stderr: &mut dyn Write) -> (Vec<Script>, i32) {
    let mut scripts = Vec::new();
    let mut code = EXIT_OK;
    for path in paths {
        let label = path.display().to_string();
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                let _ = writeln!(stderr, "error: {label}: {e}");
                code = EXIT_ENV;
                continue;
            }
        };
        let source = match RawSource::from_bytes(label.clone(), &bytes) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(stderr, "{}", Diagnostic::from(&e).render(&label));
                code = code.max(EXIT_ERROR);
                continue;
            }
        };
        let out = crate::compile(&source);
        for d in &out.diagnostics {
            let _ = writeln!(stderr, "{}", d.render(&label));
        }
        match out.script {
            Some(s) => scripts.push(s),
            None => code = code.max(EXIT_ERROR),
        }
    }
    (scripts, code)
}

fn cmd_check(paths: &[PathBuf], stderr: &mut dyn Write) -> i32 {
    compile_all(paths, stderr).1
}

fn cmd_emit(args: &EmitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (scripts, code) = compile_all(&args.paths, stderr);
    if code != EXIT_OK {
        return code;
    }
    let emitter = Emitter::new(args.dialect.into()).pretty(args.pretty);
    let mut statements = Vec::new();
    for script in &scripts {
        match emitter.emit_script(script) {
            Ok(s) => statements.extend(s),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_ERROR;
            }
        }
    }
    let text = render_batch(&statements, args.terminator, args.pretty);
    let written = match &args.out {
        Some(path) => fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            EXIT_ENV
        }
    }
}

fn cmd_run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let Some(locator) = args.connect.clone() else {
        let _ = writeln!(
            stderr,
            "error: no connection; pass --connect or set DSQLT_CONNECT"
        );
        return EXIT_ENV;
    };
    let (scripts, code) = compile_all(&args.paths, stderr);
    if code != EXIT_OK {
        return code;
    }
    let spec = ConnectionSpec::new(locator, args.dialect.into())
        .with_option("stop_on_error", !args.keep_going)
        .with_option("transactional", args.transactional);
    let report = match run_batch(&scripts, &spec) {
        Ok(r) => r,
        Err(e @ RunError::ConnectionFailed { .. }) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ENV;
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let _ = write!(stdout, "{}", report.render_table());
    if let Some(path) = &args.report {
        let written = fs::File::create(path).and_then(|f| report.write_jsonl(f));
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: cannot write report: {e}");
            return EXIT_ENV;
        }
    }
    if let Some(e) = report.first_failure() {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_ERROR;
    }
    EXIT_OK
}
