fn main() {
    std::process::exit(silver_ner_core::cli::run(std::env::args_os()));
}
