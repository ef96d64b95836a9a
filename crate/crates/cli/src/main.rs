use clap::Parser;
use prethermal_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}:", report.experiment);
            for line in &report.outcome.summary {
                println!("  {line}");
            }
            println!(
                "wrote {} files to {}",
                report.outcome.artifacts.len() + 1,
                report.out_dir.display()
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
