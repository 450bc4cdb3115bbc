fn main() {
    std::process::exit(cointsearch::cli::run_cli(std::env::args_os()));
}
