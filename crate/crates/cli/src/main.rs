fn main() {
    std::process::exit(hocdvs_cli::run(std::env::args_os()));
}
