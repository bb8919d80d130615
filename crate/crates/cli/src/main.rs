fn main() {
    std::process::exit(dispburgers_cli::dispatch(std::env::args_os()));
}
