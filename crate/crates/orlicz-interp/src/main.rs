fn main() {
    std::process::exit(orlicz_interp::cli::main());
}
