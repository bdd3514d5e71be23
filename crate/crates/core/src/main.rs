fn main() {
    std::process::exit(histrule::cli::run(std::env::args_os()));
}
