fn main() {
    std::process::exit(hardy_core::cli::run(std::env::args_os()));
}
