fn main() {
    std::process::exit(pursuit_evasion::cli::run_command(std::env::args()));
}
