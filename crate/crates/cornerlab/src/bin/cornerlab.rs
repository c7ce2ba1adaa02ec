fn main() {
    std::process::exit(cornerlab::cli::run(std::env::args_os()));
}
