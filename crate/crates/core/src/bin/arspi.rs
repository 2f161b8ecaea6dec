fn main() { std::process::exit(arspi_engine::cli::main_entry()); }
