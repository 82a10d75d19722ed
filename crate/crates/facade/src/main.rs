fn main() {
    std::process::exit(surfmotif_facade::cli::run(std::env::args_os()));
}
