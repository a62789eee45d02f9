fn main() {
    std::process::exit(ztchain::dispatch(std::env::args_os()));
}
