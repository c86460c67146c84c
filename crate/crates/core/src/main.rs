fn main() {
    std::process::exit(taxnet::cli::run(std::env::args_os()));
}
