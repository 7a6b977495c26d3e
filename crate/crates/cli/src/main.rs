fn main() -> std::process::ExitCode {
    camdepth_cli::main_entry()
}
