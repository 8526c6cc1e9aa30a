fn main() {
    std::process::exit(jump_activity::cli::main_with(std::env::args_os()));
}
