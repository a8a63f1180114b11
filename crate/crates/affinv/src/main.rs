fn main() {
    std::process::exit(affinv::run_cli());
}
