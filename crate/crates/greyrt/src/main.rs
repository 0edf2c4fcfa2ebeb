fn main() {
    println!("greyrt");
}
