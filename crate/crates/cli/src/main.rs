mod args;
mod error;
mod output;
mod run;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use serde_json::{json, Value};

use args::{Cli, COMMANDS};
use error::CliError;
use output::RunInfo;

/// Finds `--config FILE` or `--config=FILE` before clap sees the arguments.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn flag(key: &str) -> String {
    match key {
        "J" | "K" | "L" => format!("--{key}"),
        _ => format!("--{}", key.replace('_', "-")),
    }
}

/// Turns the config object into flags placed straight after the subcommand,
/// so anything given on the command line overrides it.
fn splice_config(mut argv: Vec<OsString>, path: &PathBuf) -> Result<Vec<OsString>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cfg: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    let Value::Object(map) = cfg else {
        return Err(CliError::Validation("config must be a JSON object".into()));
    };
    let pos = match argv.iter().position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref())) {
        Some(p) => p,
        None => {
            let name = map
                .get("command")
                .and_then(Value::as_str)
                .ok_or_else(|| CliError::Validation("no subcommand given and config has no \"command\"".into()))?;
            argv.push(name.into());
            argv.len() - 1
        }
    };
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &map {
        if key == "command" || key == "config" {
            continue;
        }
        let rendered = match value {
            Value::Bool(true) => Some(None),
            Value::Bool(false) | Value::Null => None,
            Value::String(s) => Some(Some(s.clone())),
            Value::Number(n) => Some(Some(n.to_string())),
            Value::Array(items) => Some(Some(
                items
                    .iter()
                    .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                    .collect::<Vec<_>>()
                    .join(","),
            )),
            Value::Object(_) => {
                return Err(CliError::Validation(format!("config key {key:?} must not be an object")));
            }
        };
        if let Some(v) = rendered {
            extra.push(flag(key).into());
            extra.extend(v.map(OsString::from));
        }
    }
    argv.splice(pos + 1..pos + 1, extra);
    Ok(argv)
}

fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let mut cmd = Cli::command().args_override_self(true);
    for name in COMMANDS {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    let matches = cmd.try_get_matches_from(argv)?;
    Cli::from_arg_matches(&matches)
}

fn real_main() -> Result<(), CliError> {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config_path(&argv) {
        argv = splice_config(argv, &path)?;
    }
    let cli = match parse(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Validation(e.to_string().trim_end().to_string())),
    };
    let plan = run::validate(&cli.command)?;
    let info = RunInfo::new(cli.command.name(), serde_json::to_value(&cli.command).expect("serializable"));

    if cli.dry_run {
        let out = json!({
            "command": info.command,
            "config": info.config,
            "config_hash": format!("sha256:{}", info.hash),
            "out_dir": cli.out_dir.display().to_string(),
            "threads": cli.threads,
            "steps": plan.steps,
            "outputs": plan.outputs,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        return Ok(());
    }

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let summary = run::execute(&cli.command, &info, &cli.out_dir)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
