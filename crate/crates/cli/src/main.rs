fn main() {
    std::process::exit(recorder_cli::main_with(std::env::args_os()));
}
