fn main() {
    std::process::exit(painleve_atlas::cli::run(std::env::args_os()));
}
