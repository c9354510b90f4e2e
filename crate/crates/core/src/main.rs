fn main() {
    std::process::exit(cdkit::cli::run_cli(std::env::args_os()));
}
