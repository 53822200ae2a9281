fn main() {
    std::process::exit(dyson_cli::run(std::env::args_os()));
}
