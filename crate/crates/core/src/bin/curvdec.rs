fn main() {
    std::process::exit(curvdec::cli::main_exit_code());
}
