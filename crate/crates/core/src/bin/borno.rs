fn main() {
    std::process::exit(borno::cli::main_entry());
}
