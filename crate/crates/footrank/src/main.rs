fn main() {
    if let Err(err) = footrank::cli::run() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
