fn main() {
    std::process::exit(mhde_core::runner_io::cli::cli(std::env::args_os()));
}
