fn main() {
    if let Err(e) = freebias::cli::run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
