fn main() {
    std::process::exit(htlocate::cli::dispatch(std::env::args_os()));
}
