fn main() {
    std::process::exit(riesz_lab_cli::run(std::env::args_os()));
}
