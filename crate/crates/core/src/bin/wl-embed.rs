use std::io::ErrorKind;
use std::process::exit;

use clap::Parser;
use wl_embed::cli::{run, Cli};
use wl_embed::Error;

/// Exit status for command-line usage errors.
const USAGE_EXIT: i32 = 64;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            exit(if e.use_stderr() { USAGE_EXIT } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            exit(USAGE_EXIT);
        }
    }
    match run(cli) {
        Ok(()) => {}
        // downstream closed the pipe, e.g. `| head`
        Err(Error::Io(e)) if e.kind() == ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code());
        }
    }
}
