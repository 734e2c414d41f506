fn main() -> std::process::ExitCode {
    ontodiff_cli::run(std::env::args_os())
}
