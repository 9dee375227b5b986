fn main() {
    std::process::exit(poclm::cli::run());
}
