fn main() {
    std::process::exit(ctxlab::cli::main_with_args(std::env::args_os()));
}
