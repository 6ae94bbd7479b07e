use clap::Parser;
use rlogse_cli::{main_with, Args};

fn main() {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            // usage errors count as configuration errors
            std::process::exit(if e.use_stderr() { 2 } else { 0 });
        }
    };
    std::process::exit(main_with(&args));
}
