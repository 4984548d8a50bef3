fn main() {
    std::process::exit(freeplane::cli::run(std::env::args_os()));
}
