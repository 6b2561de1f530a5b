fn main() {
    env_logger::init();
    std::process::exit(slucb::cli::run(std::env::args_os()));
}
