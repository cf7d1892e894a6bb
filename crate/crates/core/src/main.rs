fn main() {
    std::process::exit(pspca::cli::run(std::env::args_os()));
}
