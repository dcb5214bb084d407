fn main() {
    std::process::exit(chow_descent::cli::main_with_args(std::env::args_os()));
}
