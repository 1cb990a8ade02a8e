fn main() {
    std::process::exit(tropinf::cli::run(std::env::args_os()));
}
