fn main() {
    std::process::exit(blockage::cli::run(std::env::args_os()));
}
