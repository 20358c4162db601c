fn main() {
    std::process::exit(bloch_wkb::harness::run_cli(std::env::args()));
}
