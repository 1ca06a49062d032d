fn main() {
    std::process::exit(qmcheck::cli::run(std::env::args_os()));
}
