fn main() {
    std::process::exit(uniformity_lab::cli::dispatch(std::env::args_os()));
}
