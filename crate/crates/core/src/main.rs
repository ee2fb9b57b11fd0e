fn main() {
    std::process::exit(dvine_qr::cli::main_exit_code());
}
