fn main() {
    std::process::exit(ehsim::cli::run(std::env::args_os()));
}
