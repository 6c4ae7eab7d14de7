fn main() {
    std::process::exit(milink::cli::run(std::env::args_os()));
}
