fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(pipsolver::cli::cli_main(&args));
}
