fn main() {
    std::process::exit(ile::cli::run(std::env::args_os()));
}
