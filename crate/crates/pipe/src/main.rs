use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use valence_pipe::cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = json!({
                "error": {
                    "command": null,
                    "stage": "arguments",
                    "code": "invalid_arguments",
                    "message": e.to_string().trim_end(),
                }
            });
            eprintln!("{record}");
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    match valence_pipe::run(&cli.command) {
        Ok(output) => {
            println!("{}", json!({ "command": name, "summary": output.summary }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record(name));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
