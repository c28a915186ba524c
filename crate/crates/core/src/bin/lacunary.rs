fn main() {
    std::process::exit(lacunary::cli::run(std::env::args_os()));
}
