fn main() {
    std::process::exit(mgonal::cli::main_with_env());
}
