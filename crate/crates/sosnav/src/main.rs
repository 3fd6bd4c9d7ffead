fn main() {
    std::process::exit(sosnav::cli::main_with_args(std::env::args_os()));
}
