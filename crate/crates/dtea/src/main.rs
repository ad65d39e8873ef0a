fn main() {
    std::process::exit(dtea::cli::main_with_args(std::env::args_os()));
}
