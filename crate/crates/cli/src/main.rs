fn main() {
    std::process::exit(sphericity_cli::main_with(std::env::args_os()));
}
