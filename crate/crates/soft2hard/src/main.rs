fn main() {
    std::process::exit(soft2hard::cli::run());
}
