fn main() {
    std::process::exit(reeb_eh::cli::main_with_args(std::env::args_os()));
}
