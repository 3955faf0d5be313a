fn main() {
    std::process::exit(fde_toolkit::cli::run(std::env::args()));
}
