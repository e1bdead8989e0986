fn main() {
    std::process::exit(shufpar::run_cli(std::env::args_os()));
}
