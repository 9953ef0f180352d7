fn main() {
    std::process::exit(nimfasele::cli::main());
}
