#![no_main]

use libfuzzer_sys::fuzz_target;
use mechfluid::expr::{parse_expr, Bindings, Var};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(e) = parse_expr(src) else { return };
    let printed = e.to_string();
    let back = parse_expr(&printed).expect("printed expression parses");
    assert_eq!(back, e, "printed as {printed}");
    // derivatives and evaluation must not panic
    let x = [0.3, -0.7, 1.1, 0.5];
    let b = Bindings::new(Some(0.25), &x);
    let _ = e.eval(&b);
    for v in [Var::T, Var::X(1), Var::X(2)] {
        let _ = e.differentiate(v).eval(&b);
    }
});
