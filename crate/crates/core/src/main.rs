fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, text) = pstar::cli::run(&args);
    print!("{text}");
    std::process::exit(code);
}
