fn main() {
    std::process::exit(otmlab_cli::main_with_args(std::env::args_os()));
}
