fn main() {
    std::process::exit(sfc_survive::cli::main_with(std::env::args_os()));
}
