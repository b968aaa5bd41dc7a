fn main() {
    std::process::exit(shapeopt::cli::main_with_args(std::env::args_os()));
}
