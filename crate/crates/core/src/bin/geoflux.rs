fn main() {
    std::process::exit(geoflux::cli::main_with_args(std::env::args_os()));
}
