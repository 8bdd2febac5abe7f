fn main() {
    std::process::exit(pesto::cli::run(std::env::args_os()));
}
