fn main() {
    std::process::exit(tropcount::cli::main_with_args(std::env::args_os()));
}
