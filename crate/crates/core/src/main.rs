fn main() {
    std::process::exit(rampmerge::cli::main_with(std::env::args_os()));
}
