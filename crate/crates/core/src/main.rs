fn main() {
    std::process::exit(fitbot::cli::run(std::env::args_os()));
}
