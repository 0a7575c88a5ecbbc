mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches};

use config::{flag_name, Command, Config, ConfigError, Raw, KEYS};

const EXIT_FAILED_VERDICT: u8 = 2;

fn shared_args(cmd: clap::Command) -> clap::Command {
    let cmd = cmd
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key=value config with [section] headers, or a manifest.json"),
        )
        .arg(
            Arg::new("set")
                .long("set")
                .value_name("KEY=VALUE")
                .action(ArgAction::Append)
                .help("set any config key"),
        );
    KEYS.iter().fold(cmd, |c, k| {
        let flag: &'static str = Box::leak(flag_name(k.name).into_boxed_str());
        c.arg(
            Arg::new(k.name)
                .long(flag)
                .value_name("VALUE")
                .help(k.help)
                .allow_hyphen_values(true),
        )
    })
}

fn cli() -> clap::Command {
    let mut root = clap::Command::new("confmodel")
        .about("Configuration-model exploration, statistics and CLT diagnostics")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in Command::ALL {
        root = root.subcommand(shared_args(clap::Command::new(c.name()).about(c.about())));
    }
    root.subcommand(shared_args(
        clap::Command::new("run").about("run the command named in --config (e.g. a manifest.json)"),
    ))
}

fn raw_from(m: &ArgMatches) -> Result<Raw, ConfigError> {
    let mut raw = match m.get_one::<String>("config") {
        Some(p) => Raw::load(p.as_ref())?,
        None => Raw::default(),
    };
    let mut flags = Raw::default();
    if let Some(sets) = m.get_many::<String>("set") {
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got `{s}`")))?;
            flags.set(k.trim(), v.trim().to_string())?;
        }
    }
    for k in KEYS {
        if let Some(v) = m.get_one::<String>(k.name) {
            flags.set(k.name, v.clone())?;
        }
    }
    raw = raw.merge(flags);
    Ok(raw)
}

fn threads(cfg: &Config) -> Result<Option<usize>, ConfigError> {
    if let Some(t) = cfg.int("threads") {
        return Ok(Some(t as usize));
    }
    match std::env::var("CONFMODEL_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError(format!("CONFMODEL_THREADS must be an integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn prepare(name: &str, m: &ArgMatches) -> Result<Config, ConfigError> {
    let raw = raw_from(m)?;
    let command = if name == "run" {
        let c = raw
            .command
            .as_deref()
            .ok_or_else(|| ConfigError("`run` needs a config naming its command".into()))?;
        Command::parse(c).ok_or_else(|| ConfigError(format!("unknown command `{c}`")))?
    } else {
        Command::parse(name).expect("registered subcommand")
    };
    Config::new(command, raw)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            // Usage errors share exit 1 with other config errors.
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cfg = match prepare(name, sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("see `confmodel {name} --help`");
            return ExitCode::FAILURE;
        }
    };
    match threads(&cfg) {
        Ok(Some(t)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let out = match commands::Out::new(cfg.text("out").map(PathBuf::from)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match commands::run(cfg, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED_VERDICT),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
