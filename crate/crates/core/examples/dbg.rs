fn main() {
    let src = r#"
class B { public float v_; B(float v) { v_ = v; } }
class A {
    int count_;
    void main() {
        List<B> l = new List<B>();
        for (int i = 0; i < 5; ++i) {
            if (i % 2 == 0 && i != 3) { l.add(new B(1.5)); } else { count_ = count_ - (2 + 1) * 4; }
        }
        while (count_ < 0) { count_++; }
        float f = -(count_ + 1) * 2.0;
        print(f);
    }
}
"#;
    match mjoule::minilang::parse_program(src) {
        Ok(_) => println!("parsed ok"),
        Err(e) => println!("parse error: {e}"),
    }
}
