fn main() {
    std::process::exit(deltascreen::cli::run_cli(std::env::args_os()));
}
