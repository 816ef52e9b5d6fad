fn main() {
    std::process::exit(focusfocus_cli::run_from(std::env::args_os()));
}
