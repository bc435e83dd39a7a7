fn main() {
    std::process::exit(padel::cli::run(std::env::args_os()));
}
