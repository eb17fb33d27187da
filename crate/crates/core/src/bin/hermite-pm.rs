fn main() {
    std::process::exit(hermite_pm::cli::run(std::env::args_os().collect()));
}
