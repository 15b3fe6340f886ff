fn main() {
    std::process::exit(ctxenc_cli::main_with_stdio());
}
