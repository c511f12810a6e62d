fn main() {
    std::process::exit(posekit::cli::run(std::env::args_os()));
}
