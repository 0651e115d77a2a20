fn main() {
    std::process::exit(ahop_cli::run(std::env::args_os()));
}
