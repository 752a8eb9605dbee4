fn main() {
    std::process::exit(siplab::harness::cli_main(std::env::args_os()));
}
