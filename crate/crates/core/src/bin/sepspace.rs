fn main() {
    std::process::exit(sepspace::cli::run(std::env::args_os()));
}
