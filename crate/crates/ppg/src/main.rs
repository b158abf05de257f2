fn main() {
    std::process::exit(ppg::cli::run(std::env::args_os()));
}
