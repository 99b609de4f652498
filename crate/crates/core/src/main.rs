fn main() {
    let code = detour_locus::io::cli::cli_run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
