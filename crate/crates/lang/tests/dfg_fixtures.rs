#[path = "data/dfg_cases.rs"]
mod cases;

use fixline_lang::{build_dfg, parse_function, Access};

#[test]
fn worked_examples() {
    for case in cases::WORKED {
        cases::check(case).unwrap();
    }
}

#[test]
fn fixture_functions() {
    assert!(cases::FIXTURES.len() >= 10);
    let failures: Vec<String> = cases::FIXTURES.iter().filter_map(|c| cases::check(c).err()).collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn occurrence_list_of_the_chain() {
    let g = build_dfg(&parse_function("void f() { int a = b; int c = a; }").unwrap());
    let occ: Vec<(&str, Access)> = g.vars.iter().map(|v| (v.name.as_str(), v.access)).collect();
    assert_eq!(occ, [("a", Access::Write), ("b", Access::Read), ("c", Access::Write), ("a", Access::Read)]);
}

#[test]
fn undeclared_update_occurrences() {
    let g = build_dfg(&parse_function("void f() { a = a + 1; }").unwrap());
    let occ: Vec<(&str, Access)> = g.vars.iter().map(|v| (v.name.as_str(), v.access)).collect();
    assert_eq!(occ, [("a", Access::Write), ("a", Access::Read)]);
}
