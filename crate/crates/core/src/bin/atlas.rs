fn main() {
    std::process::exit(atlas_core::cli::run_cli(std::env::args_os()));
}
