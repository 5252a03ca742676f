fn main() {
    std::process::exit(occam::cli::main_entry());
}
