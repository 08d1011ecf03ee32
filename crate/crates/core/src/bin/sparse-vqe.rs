use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let env_seed = std::env::var("SPARSE_VQE_SEED")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok());
    let code = sparse_vqe::cli::run(
        &argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
        env_seed,
    );
    ExitCode::from(code as u8)
}
