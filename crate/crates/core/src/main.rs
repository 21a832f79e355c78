fn main() {
    std::process::exit(ncorlicz::cli::run(std::env::args_os()));
}
