fn main() {
    std::process::exit(nmqsim::cli::run(std::env::args_os()));
}
