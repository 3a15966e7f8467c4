fn main() {
    std::process::exit(klbody::cli::main_with_args(std::env::args_os()));
}
