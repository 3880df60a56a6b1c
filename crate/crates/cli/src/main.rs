fn main() {
    std::process::exit(lgq::run_command(std::env::args_os()));
}
