fn main() {
    println!("jjfloquet {}", env!("CARGO_PKG_VERSION"));
}
