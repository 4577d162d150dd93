fn main() {
    std::process::exit(repvol::cli::run(std::env::args_os()));
}
