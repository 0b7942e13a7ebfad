fn main() {
    std::process::exit(indyscope::cli::run());
}
