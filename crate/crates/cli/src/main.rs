fn main() {
    std::process::exit(chsys_cli::dispatch(std::env::args_os()));
}
