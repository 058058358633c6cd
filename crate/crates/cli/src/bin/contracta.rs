fn main() {
    std::process::exit(contracta_cli::main_with_args(std::env::args_os()));
}
