fn main() {
    std::process::exit(qfslice::cli::run());
}
