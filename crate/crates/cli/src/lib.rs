//! `sagecell` command-line front end.
//!
//! Exit codes: 0 on success, 1 on operational errors (I/O, transport, a cell
//! reporting failure), 2 on usage errors. Output is buffered and written only
//! when a command succeeds, so failures never leave partial output behind.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use sagecell_filter::cellclient::execute_code;
use sagecell_filter::packager::{self, FileSet};
use sagecell_filter::{
    make_config, ConfigOverrides, Filter, Maturity, PluginManifest, PluginVersion,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sagecell",
    version,
    about = "Turn [sage]...[/sage] blocks into SageMathCell compute cells"
)]
struct Cli {
    /// Execution server base URL.
    #[arg(long, global = true, env = "SAGECELL_SERVER", value_name = "URL")]
    server: Option<String>,

    /// Pseudotag name.
    #[arg(long, global = true, value_name = "NAME")]
    tag: Option<String>,

    /// Request timeout for `exec`, in seconds.
    #[arg(long, global = true, default_value_t = 30.0, value_name = "SECONDS")]
    timeout: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite blocks into compute cells.
    Filter(InputOutput),
    /// List blocks: index, start, end, raw length (tab-separated).
    Scan(Input),
    /// Run every block against the execution server.
    Exec(Input),
    /// Plugin packaging.
    #[command(subcommand)]
    Package(PackageCommand),
}

#[derive(Debug, Args)]
struct Input {
    /// Input file; `-` or absent reads stdin.
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InputOutput {
    input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum PackageCommand {
    /// Rename the single top-level directory of a plugin archive.
    Repack {
        archive: PathBuf,
        #[arg(short = 'o', long = "output", value_name = "FILE")]
        output: Option<PathBuf>,
        #[arg(long, default_value = packager::DEFAULT_ROOT)]
        root: String,
    },
    /// Write version.php, settings.php and the language file.
    Gen {
        /// Plugin version, YYYYMMDDSS.
        #[arg(long = "plugin-version", value_name = "YYYYMMDDSS")]
        version: u64,
        /// Minimum platform version.
        #[arg(long)]
        requires: u64,
        #[arg(long, default_value = "stable")]
        maturity: String,
        #[arg(short = 'o', long = "output", value_name = "DIR")]
        output: PathBuf,
    },
    /// Check a plugin directory or archive.
    Validate { path: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Operational(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Operational(m) => f.write_str(m),
        }
    }
}

/// What a successful command produces.
struct Outcome {
    stdout: Vec<u8>,
    code: i32,
}

impl Outcome {
    fn ok(stdout: Vec<u8>) -> Self {
        Self {
            stdout,
            code: EXIT_OK,
        }
    }
}

pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };

    match dispatch(cli, stdin, stderr) {
        Ok(outcome) => {
            if let Err(e) = stdout
                .write_all(&outcome.stdout)
                .and_then(|_| stdout.flush())
            {
                let _ = writeln!(stderr, "sagecell: error: cannot write to stdout: {e}");
                return EXIT_FAILURE;
            }
            outcome.code
        }
        Err(failure) => {
            let _ = writeln!(stderr, "sagecell: error: {failure}");
            match failure {
                Failure::Usage(_) => EXIT_USAGE,
                Failure::Operational(_) => EXIT_FAILURE,
            }
        }
    }
}

fn dispatch(cli: Cli, stdin: &mut dyn Read, stderr: &mut dyn Write) -> Result<Outcome, Failure> {
    let filter = || -> Result<Filter, Failure> {
        let config = make_config(ConfigOverrides {
            tag_name: cli.tag.clone(),
            server_url: cli.server.clone(),
            ..Default::default()
        })
        .map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(Filter::new(config))
    };

    match &cli.command {
        Command::Filter(io) => {
            let filter = filter()?;
            let content = read_input(io.input.as_deref(), stdin)?;
            let out = filter.filter(&content);
            match &io.output {
                Some(path) => {
                    write_file(path, &out.html)?;
                    Ok(Outcome::ok(Vec::new()))
                }
                None => Ok(Outcome::ok(out.html)),
            }
        }
        Command::Scan(input) => {
            let filter = filter()?;
            let content = read_input(input.input.as_deref(), stdin)?;
            let mut out = Vec::new();
            for (i, block) in filter.prepare_blocks(&content).iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    i + 1,
                    block.span_start,
                    block.span_end,
                    block.raw.len()
                )
                .expect("writing to a Vec cannot fail");
            }
            Ok(Outcome::ok(out))
        }
        Command::Exec(input) => {
            let filter = filter()?;
            let timeout = timeout(cli.timeout)?;
            let content = read_input(input.input.as_deref(), stdin)?;
            exec(&filter, &content, timeout)
        }
        Command::Package(cmd) => package(cmd, stderr),
    }
}

fn timeout(seconds: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(seconds)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| {
            Failure::Usage(format!(
                "--timeout must be a positive number of seconds, got {seconds}"
            ))
        })
}

fn exec(filter: &Filter, content: &[u8], timeout: Duration) -> Result<Outcome, Failure> {
    let server = filter.config().server_url();
    let mut out = Vec::new();
    let mut all_ok = true;
    for (i, block) in filter.prepare_blocks(content).iter().enumerate() {
        let code = block.sanitized.as_deref().unwrap_or_default();
        let result = execute_code(code, server, timeout)
            .map_err(|e| Failure::Operational(format!("cell {}: {e}", i + 1)))?;
        all_ok &= result.success;
        writeln!(
            out,
            "{}-{}\t{}",
            filter.config().id_prefix(),
            i + 1,
            if result.success { "success" } else { "failure" }
        )
        .expect("writing to a Vec cannot fail");
        out.extend_from_slice(result.stdout.as_bytes());
        if !result.stdout.is_empty() && !result.stdout.ends_with('\n') {
            out.push(b'\n');
        }
    }
    Ok(Outcome {
        stdout: out,
        code: if all_ok { EXIT_OK } else { EXIT_FAILURE },
    })
}

fn package(cmd: &PackageCommand, stderr: &mut dyn Write) -> Result<Outcome, Failure> {
    match cmd {
        PackageCommand::Repack {
            archive,
            output,
            root,
        } => {
            let bytes = read_path(archive)?;
            let repacked = packager::repack_archive(&bytes, root)
                .map_err(|e| Failure::Operational(format!("{}: {e}", archive.display())))?;
            match output {
                Some(path) => {
                    write_file(path, &repacked)?;
                    Ok(Outcome::ok(Vec::new()))
                }
                None => Ok(Outcome::ok(repacked)),
            }
        }
        PackageCommand::Gen {
            version,
            requires,
            maturity,
            output,
        } => {
            let version =
                PluginVersion::new(*version).map_err(|e| Failure::Usage(e.to_string()))?;
            let maturity = maturity
                .parse::<Maturity>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let manifest = PluginManifest::new(version, *requires).with_maturity(maturity);
            let files = packager::gen_manifest(&manifest);
            files
                .write_to_dir(output)
                .map_err(|e| Failure::Operational(format!("{}: {e}", output.display())))?;
            let mut out = Vec::new();
            for (path, _) in files.iter() {
                writeln!(out, "{}", output.join(path.as_str()).display())
                    .expect("writing to a Vec cannot fail");
            }
            Ok(Outcome::ok(out))
        }
        PackageCommand::Validate { path } => {
            let files = if path.is_dir() {
                FileSet::from_dir(path)
            } else {
                FileSet::from_zip(&read_path(path)?).map(|(_, files)| files)
            }
            .map_err(|e| Failure::Operational(format!("{}: {e}", path.display())))?;
            let report = packager::validate_plugin(&files);
            if report.passed() {
                Ok(Outcome::ok(report.to_string().into_bytes()))
            } else {
                let _ = stderr.write_all(report.to_string().as_bytes());
                Err(Failure::Operational(format!(
                    "{}: {} check(s) failed",
                    path.display(),
                    report.failures().count()
                )))
            }
        }
    }
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<Vec<u8>, Failure> {
    match path {
        None => read_stdin(stdin),
        Some(p) if p == Path::new("-") => read_stdin(stdin),
        Some(p) => read_path(p),
    }
}

fn read_stdin(stdin: &mut dyn Read) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    stdin
        .read_to_end(&mut buf)
        .map_err(|e| Failure::Operational(format!("<stdin>: {e}")))?;
    Ok(buf)
}

fn read_path(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Operational(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Operational(format!("{}: {e}", path.display())))
}
