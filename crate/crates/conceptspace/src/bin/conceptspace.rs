fn main() {
    std::process::exit(conceptspace::cli::main());
}
