fn main() {
    let code = clrt::cli::run_cli(std::env::args_os());
    std::process::exit(code);
}
