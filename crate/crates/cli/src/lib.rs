//! Headless front end: record, verify, report, project, replay, export,
//! schema dump, and the two HTTP services.
//!
//! Every failure prints one JSON object on stderr and exits with the code
//! of its [`ExitKind`].

pub mod cmd;
pub mod failure;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recorder_core::model::Profile;

pub use failure::{ExitKind, Failure};

#[derive(Debug, Parser)]
#[command(name = "recorder", version, about = "Simulated first-person recorder")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Record a session end to end and print its data rates.
    Record(RecordArgs),
    /// Check a session's hash chain against the attestation service.
    Verify(VerifyArgs),
    /// Print per-stream data rates of a recorded session.
    Report(ReportArgs),
    /// Days of recording needed to collect a target volume.
    Project(ProjectArgs),
    /// Re-emit stored envelopes as JSON lines in time order.
    Replay(ReplayArgs),
    /// Pack a session directory into a zip archive.
    Export(ExportArgs),
    /// Write every JSON Schema document under a directory.
    Schema(SchemaArgs),
    /// Run the control API.
    Serve(ServeArgs),
    /// Run a standalone attestation service.
    Attestd(AttestdArgs),
}

/// Where attestations are issued and checked.
#[derive(Debug, Clone, Default, Args)]
#[group(multiple = false)]
pub struct ServiceArgs {
    /// Remote attestation service base URL.
    #[arg(long, value_name = "URL")]
    pub service: Option<String>,
    /// Directory of a local attestation ledger.
    #[arg(long, value_name = "DIR")]
    pub local_store: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RecordArgs {
    /// Scenario script (JSON); a seeded demo scenario when omitted.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Session length in seconds; overrides the scenario's duration.
    #[arg(long, value_name = "S", allow_negative_numbers = true)]
    pub duration: Option<f64>,
    /// Sessions root; the session is written to `<DIR>/<session id>`.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Advance simulated time as fast as possible (the default).
    #[arg(long, conflicts_with = "real_time")]
    pub virtual_clock: bool,
    /// Pace capture against the wall clock.
    #[arg(long)]
    pub real_time: bool,
    /// Wall-clock speed-up for `--real-time`.
    #[arg(
        long,
        default_value_t = 1.0,
        requires = "real_time",
        allow_negative_numbers = true
    )]
    pub speed: f64,
    /// Overrides the scenario seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Session configuration (JSON); defaults when omitted.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Consent registry (JSON array of consent records).
    #[arg(long, value_name = "FILE")]
    pub consent: Option<PathBuf>,
    #[command(flatten)]
    pub attestation: ServiceArgs,
    /// Record without an attestation service; every segment is a gap.
    #[arg(long, conflicts_with_all = ["service", "local_store"])]
    pub offline: bool,
    /// Print the result as one JSON object.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_name = "DIR")]
    pub session: PathBuf,
    /// Defaults to the `.attestation` ledger next to the session.
    #[command(flatten)]
    pub attestation: ServiceArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "DIR")]
    pub session: PathBuf,
    /// Print only the JSON, without the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Text,
}

impl From<ModeArg> for Profile {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Profile::Full,
            ModeArg::Text => Profile::Text,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(
        long,
        value_name = "G",
        allow_negative_numbers = true,
        required_unless_present = "table3",
        conflicts_with = "table3"
    )]
    pub target_gb: Option<f64>,
    #[arg(long, value_enum, default_value = "full")]
    pub mode: ModeArg,
    /// All six reference cells, computed from the default rates.
    #[arg(long)]
    pub table3: bool,
    /// Rates to project from; defaults when omitted.
    #[arg(long, value_name = "FILE", conflicts_with = "table3")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long, value_name = "DIR")]
    pub session: PathBuf,
    /// Playback speed-up; `inf` replays without pauses.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub speed: f64,
    /// Comma-separated stream ids; all streams when omitted.
    #[arg(long, value_name = "LIST", default_value = "")]
    pub streams: String,
    #[arg(long, value_name = "MS", default_value_t = 0)]
    pub from_ms: u64,
    #[arg(long, value_name = "MS", default_value_t = u64::MAX)]
    pub to_ms: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "DIR")]
    pub session: PathBuf,
    #[arg(long, value_name = "FILE.zip")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SchemaArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Server configuration (JSON).
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AttestdArgs {
    #[arg(long, default_value = "127.0.0.1:8090")]
    pub listen: std::net::SocketAddr,
    /// Ledger directory; created when missing.
    #[arg(long, value_name = "DIR")]
    pub store: PathBuf,
}

/// Runs one parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Record(a) => cmd::record::run(&a, out),
        Command::Verify(a) => cmd::verify::run(&a, out),
        Command::Report(a) => cmd::report::run(&a, out),
        Command::Project(a) => cmd::project::run(&a, out),
        Command::Replay(a) => cmd::replay::run(&a, out),
        Command::Export(a) => cmd::export::run(&a, out),
        Command::Schema(a) => cmd::schema::run(&a, out),
        Command::Serve(a) => cmd::serve::run(&a),
        Command::Attestd(a) => cmd::serve::attestd(&a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Help and version output goes to stdout with code 0.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => return Failure::new(ExitKind::Usage, e.to_string().trim_end()).report(),
    };
    init_logging(&cli.command);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|()| out.flush().or_else(failure::ignore_broken_pipe)) {
        Ok(()) => 0,
        Err(f) => f.report(),
    }
}

fn init_logging(command: &Command) {
    let default = match command {
        Command::Serve(_) | Command::Attestd(_) => "info",
        _ => "warn",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default))
        .try_init();
}
