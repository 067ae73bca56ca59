fn main() {
    std::process::exit(pdmkit::cli::run(std::env::args_os()));
}
