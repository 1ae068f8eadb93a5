fn main() {
    std::process::exit(mergelobby::cli::run(std::env::args_os()));
}
