fn main() -> std::process::ExitCode {
    virtlab_server::cli::main()
}
