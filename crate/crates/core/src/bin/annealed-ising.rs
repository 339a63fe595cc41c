fn main() {
    std::process::exit(annealed_ising::cli::run(std::env::args_os()));
}
