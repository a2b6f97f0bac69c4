fn main() {
    std::process::exit(hodge_scatter::cli::main());
}
