fn main() {
    std::process::exit(zccs_cli::run_command(std::env::args_os()));
}
