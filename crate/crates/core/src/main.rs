fn main() {
    std::process::exit(lossy_witness::cli::run(std::env::args_os()));
}
