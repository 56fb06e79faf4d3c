fn main() {
    std::process::exit(spin_atlas::cli::run(std::env::args_os()));
}
