fn main() {
    std::process::exit(adastream::cli::run_cli(std::env::args_os()));
}
