fn main() {
    std::process::exit(squeeze_ratio::cli::run(std::env::args_os()));
}
