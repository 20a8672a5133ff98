fn main() {
    std::process::exit(dqc_cli::main_with(std::env::args_os()));
}
