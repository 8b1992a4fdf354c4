fn main() {
    std::process::exit(hamforge::run_cli());
}
