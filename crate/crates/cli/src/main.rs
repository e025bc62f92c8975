use std::io::Write;

fn main() {
    let run = ergolab_cli::run_args(std::env::args_os());
    print!("{}", run.stdout);
    eprint!("{}", run.stderr);
    std::io::stdout().flush().ok();
    std::process::exit(run.code);
}
