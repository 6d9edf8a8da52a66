fn main() {
    std::process::exit(larmor_core::cli::run(std::env::args_os()));
}
