use std::io::Write;

fn main() {
    let threads = std::env::var("CAYLEYLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("internal error: thread pool: {e}");
            std::process::exit(cayleylab_cli::EXIT_INTERNAL);
        }
    };
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pool.install(|| cayleylab_cli::run(std::env::args_os(), &mut out, &mut err));
    let _ = std::io::stderr().write_all(&err);
    let mut stdout = std::io::stdout().lock();
    if (stdout.write_all(&out).is_err() || stdout.flush().is_err()) && code == 0 {
        std::process::exit(cayleylab_cli::EXIT_INTERNAL);
    }
    std::process::exit(code);
}
