fn main() {
    std::process::exit(cifc::run(std::env::args_os()));
}
