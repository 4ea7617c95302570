//! One positive and two or more negative hand-written cases per pattern.
//! Each case is a (buggy, fixed) pair; negatives show the pattern does not
//! fire.

use fixline_lang::{match_pattern, parse_function, DefectLabel, PatternError};
use DefectLabel::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Label(DefectLabel),
    NoMatch,
    NotSingleStatement,
}

pub struct PatternCase {
    pub pattern: DefectLabel,
    /// Whole functions rather than a statement placed in a fixed body.
    pub function: bool,
    pub buggy: &'static str,
    pub fixed: &'static str,
    pub expect: Expect,
}

const fn s(pattern: DefectLabel, buggy: &'static str, fixed: &'static str, expect: Expect) -> PatternCase {
    PatternCase { pattern, function: false, buggy, fixed, expect }
}

const fn f(pattern: DefectLabel, buggy: &'static str, fixed: &'static str, expect: Expect) -> PatternCase {
    PatternCase { pattern, function: true, buggy, fixed, expect }
}

use Expect::{Label as L, NoMatch as N, NotSingleStatement as M};

pub const CASES: &[PatternCase] = &[
    s(ChangeIdentifierUsed, "g(a);", "g(b);", L(ChangeIdentifierUsed)),
    s(ChangeIdentifierUsed, "a.run();", "b.run();", L(SameFunctionChangeCaller)),
    s(ChangeIdentifierUsed, "g(a, b);", "g(b, a);", L(SameFunctionSwapArgs)),
    s(ChangeNumericLiteral, "x = 1;", "x = 2;", L(ChangeNumericLiteral)),
    s(ChangeNumericLiteral, "x = 1;", "x = y;", N),
    s(ChangeNumericLiteral, "x = true;", "x = false;", L(ChangeBooleanLiteral)),
    s(ChangeBooleanLiteral, "return true;", "return false;", L(ChangeBooleanLiteral)),
    s(ChangeBooleanLiteral, "return true;", "return x;", N),
    s(ChangeBooleanLiteral, "flag = 0;", "flag = 1;", L(ChangeNumericLiteral)),
    f(ChangeModifier, "public void f() { g(); }", "private void f() { g(); }", L(ChangeModifier)),
    s(ChangeModifier, "final int k = a;", "int k = a;", L(ChangeModifier)),
    f(ChangeModifier, "public void f() throws E { g(); }", "private void f() { g(); }", N),
    f(ChangeModifier, "public void f() { g(); }", "private void h() { g(); }", M),
    s(WrongFunctionName, "foo(x);", "bar(x);", L(WrongFunctionName)),
    s(WrongFunctionName, "foo(x);", "bar(x, y);", N),
    s(WrongFunctionName, "a.foo(x);", "b.foo(x);", L(SameFunctionChangeCaller)),
    s(SameFunctionMoreArgs, "g(a);", "g(a, b);", L(SameFunctionMoreArgs)),
    s(SameFunctionMoreArgs, "g(a, b);", "g(a);", L(SameFunctionLessArgs)),
    s(SameFunctionMoreArgs, "g(a);", "h(a, b);", N),
    s(SameFunctionLessArgs, "x = m.g(a, b);", "x = m.g(a);", L(SameFunctionLessArgs)),
    s(SameFunctionLessArgs, "x = m.g(a);", "x = m.g(a, b);", L(SameFunctionMoreArgs)),
    s(SameFunctionLessArgs, "g(a, b);", "h(a);", N),
    s(SameFunctionChangeCaller, "a.run(x);", "b.run(x);", L(SameFunctionChangeCaller)),
    s(SameFunctionChangeCaller, "a.run(x);", "a.stop(x);", L(WrongFunctionName)),
    s(SameFunctionChangeCaller, "a.run(x);", "b.stop(x);", N),
    s(SameFunctionSwapArgs, "g(a, b, c);", "g(b, a, c);", L(SameFunctionSwapArgs)),
    s(SameFunctionSwapArgs, "g(a, b, c);", "g(b, c, a);", N),
    s(SameFunctionSwapArgs, "g(a, b);", "h(b, a);", N),
    s(ChangeBinaryOperator, "x = a + b;", "x = a - b;", L(ChangeBinaryOperator)),
    s(ChangeBinaryOperator, "x = a + b;", "x = a + c;", L(ChangeIdentifierUsed)),
    s(ChangeBinaryOperator, "x = a + b;", "x = b + a;", N),
    s(ChangeUnaryOperator, "return !ok;", "return ok;", L(ChangeUnaryOperator)),
    s(ChangeUnaryOperator, "i++;", "i--;", L(ChangeUnaryOperator)),
    s(ChangeUnaryOperator, "i++;", "i += 2;", N),
    s(ChangeUnaryOperator, "return !ok;", "return !done;", L(ChangeIdentifierUsed)),
    s(ChangeOperand, "x = a + b;", "x = a + g(b);", L(ChangeOperand)),
    s(ChangeOperand, "x = a + b;", "x = a + c;", L(ChangeIdentifierUsed)),
    s(ChangeOperand, "x = b;", "x = g(b);", N),
    s(MoreSpecificIf, "if (a) { g(); }", "if (a && b) { g(); }", L(MoreSpecificIf)),
    s(MoreSpecificIf, "if (a) { g(); }", "if (a || b) { g(); }", L(LessSpecificIf)),
    s(MoreSpecificIf, "while (a) { g(); }", "while (a && b) { g(); }", N),
    s(LessSpecificIf, "if (a > 0) { g(); }", "if (a > 0 || b) { g(); }", L(LessSpecificIf)),
    s(LessSpecificIf, "if (a > 0) { g(); }", "if (a > 0 && b) { g(); }", L(MoreSpecificIf)),
    s(LessSpecificIf, "if (a && b) { g(); }", "if (a || b) { g(); }", L(ChangeBinaryOperator)),
    f(MissingThrowsException, "void f() { g(); }", "void f() throws IOException { g(); }", L(MissingThrowsException)),
    f(MissingThrowsException, "void f() throws IOException { g(); }", "void f() { g(); }", L(DeleteThrowsException)),
    f(MissingThrowsException, "void f() { g(); }", "void f() throws IOException { h(); }", M),
    f(DeleteThrowsException, "void f() throws A, B { g(); }", "void f() throws A { g(); }", L(DeleteThrowsException)),
    f(DeleteThrowsException, "void f() throws A { g(); }", "void f() throws A, B { g(); }", L(MissingThrowsException)),
    f(DeleteThrowsException, "void f() throws A { g(); }", "void f() throws B { g(); }", N),
];

pub fn wrap(stmt: &str) -> String {
    format!("void f(int a, int b) {{\n    int z = 0;\n    {stmt}\n    return;\n}}")
}

pub fn classify(case: &PatternCase) -> Result<Option<DefectLabel>, PatternError> {
    let (b, f) = if case.function { (case.buggy.to_string(), case.fixed.to_string()) } else { (wrap(case.buggy), wrap(case.fixed)) };
    let b = parse_function(&b).expect("buggy side parses");
    let f = parse_function(&f).expect("fixed side parses");
    match_pattern(&b, &f).map(|m| m.map(|m| m.label))
}

pub fn check(case: &PatternCase) -> Result<(), String> {
    let got = match classify(case) {
        Ok(Some(l)) => Expect::Label(l),
        Ok(None) => Expect::NoMatch,
        Err(PatternError::NotSingleStatement { .. }) => Expect::NotSingleStatement,
        Err(e) => return Err(format!("{} -> {}: {e}", case.buggy, case.fixed)),
    };
    if got == case.expect {
        Ok(())
    } else {
        Err(format!("{} -> {}: expected {:?}, got {got:?}", case.buggy, case.fixed, case.expect))
    }
}
