fn main() {
    std::process::exit(vdl_core::cli::main_with_args(std::env::args_os()));
}
