fn main() {
    println!("channelflow");
}
