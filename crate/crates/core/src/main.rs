fn main() {
    std::process::exit(tcsde::cli::main_with_args(std::env::args_os()));
}
