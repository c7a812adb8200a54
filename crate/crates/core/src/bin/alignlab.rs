fn main() -> std::process::ExitCode {
    alignlab::cli::main_with_args(std::env::args_os())
}
