fn main() {
    std::process::exit(renyi_epi::cli::main_with_args(std::env::args_os()));
}
