fn main() -> std::process::ExitCode {
    qmac::cli::main()
}
