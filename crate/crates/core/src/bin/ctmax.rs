fn main() {
    std::process::exit(ctmax::cli::dispatch(std::env::args_os()));
}
