fn main() {
    std::process::exit(hilbert_dedekind::cli::run(std::env::args()));
}
