fn main() {
    std::process::exit(nilcube_cli::run(std::env::args_os()));
}
