fn main() {
    std::process::exit(nncap_cli::run_cli(std::env::args_os()));
}
