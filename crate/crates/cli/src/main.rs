use clap::Parser;
use holonoise_cli::{flush_stdout, run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    flush_stdout();
    std::process::exit(code);
}
