fn main() {
    std::process::exit(semilinear_lab::runner::run(std::env::args_os()));
}
