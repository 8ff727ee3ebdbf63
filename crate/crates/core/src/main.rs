fn main() {
    std::process::exit(mb_lab::cli::run(std::env::args_os()));
}
