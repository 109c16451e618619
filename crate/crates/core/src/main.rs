fn main() {
    std::process::exit(sqzent::cli::main_with_args(std::env::args_os()));
}
