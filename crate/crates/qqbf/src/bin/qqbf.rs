fn main() {
    std::process::exit(qqbf::cli::main_with_args(std::env::args_os()));
}
