fn main() {
    std::process::exit(phi2::cli::run(std::env::args_os()));
}
