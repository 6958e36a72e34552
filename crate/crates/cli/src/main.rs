fn main() {
    std::process::exit(radar_cs_cli::run(std::env::args_os()));
}
