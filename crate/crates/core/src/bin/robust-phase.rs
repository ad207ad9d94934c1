fn main() {
    std::process::exit(robust_phase::harness::cli::cli_main(std::env::args_os()));
}
