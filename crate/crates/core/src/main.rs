fn main() -> std::process::ExitCode {
    attrib_bayes::cli::main()
}
