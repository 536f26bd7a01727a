fn main() {
    std::process::exit(quanvkit::cli::run(std::env::args_os()));
}
