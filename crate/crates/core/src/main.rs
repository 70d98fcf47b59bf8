fn main() {
    std::process::exit(amlp::cli::dispatch(std::env::args_os()));
}
