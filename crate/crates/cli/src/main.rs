fn main() {
    std::process::exit(srsd_cli::main_with(std::env::args_os()));
}
