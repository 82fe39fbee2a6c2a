//! Bundled example programs.

pub const INTRO: &str = include_str!("../corpus/intro.ctx");
pub const CONDITIONAL: &str = include_str!("../corpus/conditional.ctx");
pub const QUERYPLAN: &str = include_str!("../corpus/queryplan.ctx");
pub const LAMBDA: &str = include_str!("../corpus/lambda.ctx");

/// `(name, source)` for every bundled file.
pub fn all() -> [(&'static str, &'static str); 4] {
    [
        ("intro.ctx", INTRO),
        ("conditional.ctx", CONDITIONAL),
        ("queryplan.ctx", QUERYPLAN),
        ("lambda.ctx", LAMBDA),
    ]
}

/// The term nested `k` conditionals deep:
/// `t0 = (* x y)`, `ti = (if (== x n) t(i-1) (+ t(i-1) y))` with `n = i + 1`.
pub fn nested_term(k: usize) -> String {
    let mut t = "(* x y)".to_string();
    for i in 1..=k {
        t = format!("(if (== x {}) {t} (+ {t} y))", i + 1);
    }
    t
}

/// A conditional program nested `k` deep, using the rules of `intro.ctx`.
pub fn nested_conditional(k: usize) -> String {
    let numbers: Vec<String> = (2..=k + 1).map(|n| n.to_string()).collect();
    let mut constants = vec!["x", "y", "true", "false"];
    constants.extend(numbers.iter().map(String::as_str));
    if k == 0 {
        constants.push("2");
    }
    format!(
        "; generated: {k} nested conditionals\n\
         (function if 3)\n\
         (function == 2)\n\
         (function * 2)\n\
         (function + 2)\n\
         (function shift 1)\n\
         (constants {})\n\
         (scope-if if true false)\n\
         (term {})\n\
         (rule eq-elim ?a ?b :when ((= (== ?a ?b) true)))\n\
         (rule mul2-to-shift (* 2 ?y) (shift ?y))\n\
         (run 20)\n\
         (check-not-equal bot (* x y) (* 2 y))\n",
        constants.join(" "),
        nested_term(k)
    )
}
