fn main() {
    std::process::exit(wohs::cli::run(std::env::args_os()));
}
