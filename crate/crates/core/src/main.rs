fn main() {
    std::process::exit(reskit::cli::run(std::env::args_os()));
}
