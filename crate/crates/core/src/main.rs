fn main() {
    std::process::exit(petrinv::cli::run(std::env::args_os()));
}
