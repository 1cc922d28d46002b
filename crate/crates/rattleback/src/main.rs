fn main() {
    std::process::exit(rattleback::cli::main_with_args(std::env::args_os()));
}
