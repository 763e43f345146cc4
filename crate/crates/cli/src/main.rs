fn main() {
    std::process::exit(mandelroots_cli::run(std::env::args_os()));
}
