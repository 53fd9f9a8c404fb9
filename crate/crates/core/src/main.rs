fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    std::process::exit(flowmot::cli::run_from(std::env::args_os()));
}
