fn main() {
    std::process::exit(skl_lab::cli::run(std::env::args_os()));
}
