fn main() {
    std::process::exit(channel_optima::cli::run_from(std::env::args_os()));
}
