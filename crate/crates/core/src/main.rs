fn main() {
    std::process::exit(surface_euler::cli::main_with_args(std::env::args_os()));
}
