fn main() {
    std::process::exit(fock_cli::main_with_args(std::env::args_os()));
}
