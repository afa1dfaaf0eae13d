fn main() -> std::process::ExitCode {
    ipcamo::cli::main()
}
