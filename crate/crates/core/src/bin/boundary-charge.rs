fn main() {
    std::process::exit(boundary_charge::cli::main_with_args(std::env::args_os()));
}
