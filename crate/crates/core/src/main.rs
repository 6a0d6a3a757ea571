fn main() {
    std::process::exit(sl2adic::cli::run(std::env::args_os()));
}
