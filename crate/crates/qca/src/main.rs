fn main() {
    std::process::exit(qca::cli::run(std::env::args_os()));
}
