fn main() {
    let code = opquad::cli::main(std::env::args_os());
    std::process::exit(code);
}
