fn main() {
    std::process::exit(g2l_cli::run(std::env::args_os()));
}
