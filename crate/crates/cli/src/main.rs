fn main() {
    std::process::exit(rjm_cli::run(std::env::args_os()));
}
