fn main() {
    std::process::exit(docsearch_cli::run(std::env::args_os()));
}
