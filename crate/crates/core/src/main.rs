fn main() {
    std::process::exit(nr_mumimo::cli::main_with_args(std::env::args_os()));
}
