fn main() {
    eprintln!("arrsweep CLI is assembled in a later build step");
    std::process::exit(2);
}
