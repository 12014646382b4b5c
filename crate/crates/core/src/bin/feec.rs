fn main() {
    std::process::exit(feec::harness::cli::run(std::env::args_os()));
}
