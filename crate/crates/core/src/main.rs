fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = rough_billiards::cli::run(std::env::args().skip(1));
    std::process::exit(code);
}
