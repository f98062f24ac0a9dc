fn main() {
    std::process::exit(bessel_hardy_cli::run(std::env::args_os()));
}
