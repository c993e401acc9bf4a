fn main() {
    std::process::exit(readout_cli::main_with_args(std::env::args_os()));
}
