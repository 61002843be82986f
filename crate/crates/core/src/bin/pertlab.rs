fn main() {
    std::process::exit(pertlab::cli::args::main_with_args(std::env::args_os()));
}
