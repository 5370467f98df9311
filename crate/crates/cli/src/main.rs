fn main() {
    std::process::exit(hhbox_cli::run(std::env::args_os()));
}
