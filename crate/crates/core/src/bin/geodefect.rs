fn main() {
    geodefect::cli::main()
}
