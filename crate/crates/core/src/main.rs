fn main() {
    std::process::exit(wickburgers::cli::run(std::env::args_os()));
}
