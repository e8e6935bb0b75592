fn main() {
    std::process::exit(kpin::cli::run_from_env());
}
