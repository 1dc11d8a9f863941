fn main() { std::process::exit(primecert::cli::run(std::env::args().collect())); }
