fn main() {
    std::process::exit(intergrow::cli::main_exit());
}
