fn main() {
    std::process::exit(liverseg::cli::run(std::env::args_os()));
}
