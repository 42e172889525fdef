// Copyright 2026 The hijack-impact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

mod args;
mod commands;
mod error;
mod output;

use std::panic;
use std::process::ExitCode;

use clap::Parser;

use args::{overlay, Cli, Command};
use error::{io_data, usage, CliError, CliResult};

fn load_config(cli: &Cli) -> CliResult<Option<toml::Table>> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| io_data(path, e))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for key in table.keys() {
        let known = key == "jobs"
            || [
                "generate",
                "simulate",
                "eval",
                "theory",
                "fit-lre",
                "predict",
                "ping-targets",
                "classify",
                "experiment",
            ]
            .contains(&key.as_str());
        if !known {
            return Err(usage(format!("{}: unknown section {key:?}", path.display())));
        }
    }
    Ok(Some(table))
}

fn run(cli: Cli) -> CliResult<()> {
    let config = load_config(&cli)?;
    let section = config.as_ref().and_then(|c| c.get(cli.command.name()));
    let jobs = match cli.jobs {
        Some(j) => j,
        None => match config.as_ref().and_then(|c| c.get("jobs")) {
            Some(v) => v
                .as_integer()
                .and_then(|j| usize::try_from(j).ok())
                .ok_or_else(|| usage("config: jobs must be a non-negative integer"))?,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    let jobs = jobs.max(1);
    match cli.command {
        Command::Generate(a) => commands::generate(overlay(a, section)?),
        Command::Simulate(a) => commands::simulate(overlay(a, section)?, jobs),
        Command::Eval(a) => commands::eval(overlay(a, section)?),
        Command::Theory(a) => commands::theory(overlay(a, section)?),
        Command::FitLre(a) => commands::fit_lre_cmd(overlay(a, section)?),
        Command::Predict(a) => commands::predict(overlay(a, section)?),
        Command::PingTargets(a) => commands::ping_targets(overlay(a, section)?),
        Command::Classify(a) => commands::classify(overlay(a, section)?),
        Command::Experiment(a) => commands::experiment(overlay(a, section)?, jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    let result = match panic::catch_unwind(|| run(cli)) {
        Ok(r) => r,
        Err(_) => Err(CliError::Internal("panicked".into())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Internal(ref m) if m == "panicked") {
                eprintln!("hijack-impact: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
