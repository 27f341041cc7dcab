fn main() {
    std::process::exit(rankmedian::cli::main());
}
