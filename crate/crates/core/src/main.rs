fn main() {
    std::process::exit(udr_adc::cli::run(std::env::args_os()));
}
