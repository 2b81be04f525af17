fn main() {
    std::process::exit(linkage_area::cli::run(std::env::args_os()));
}
