fn main() {
    std::process::exit(casimir_stack::cli::main_with_args(std::env::args_os()));
}
