fn main() {
    std::process::exit(steklov_cli::run(std::env::args_os()));
}
