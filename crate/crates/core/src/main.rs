fn main() {
    std::process::exit(conformal_plap::cli::main_with_args(std::env::args_os()));
}
