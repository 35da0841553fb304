use std::io::Write;

fn main() {
    let out = apeq::cli::run(std::env::args_os());
    eprint!("{}", out.stderr);
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}", out.stdout);
    let _ = stdout.flush();
    std::process::exit(out.code);
}
