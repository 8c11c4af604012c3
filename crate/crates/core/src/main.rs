fn main() {
    std::process::exit(cascade_steering::cli::run(std::env::args_os()));
}
