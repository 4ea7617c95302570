//! Hand-traced data-flow graphs. Indices follow leaf order with parameters
//! first; each expected edge set was derived by hand from the reaching
//! definitions at every read.

pub struct DfgCase {
    pub name: &'static str,
    pub src: &'static str,
    pub edges: &'static [(usize, usize)],
}

/// The three worked examples of the data-flow definition.
pub const WORKED: &[DfgCase] = &[
    // a0 b1 c2 a3
    DfgCase { name: "straight_line_chain", src: "void f() { int a = b; int c = a; }", edges: &[(1, 0), (0, 3), (3, 2)] },
    DfgCase { name: "literal_initializer", src: "void f() { int x = 1; }", edges: &[] },
    // a0 a1
    DfgCase { name: "undeclared_self_update", src: "void f() { a = a + 1; }", edges: &[(1, 0)] },
];

pub const FIXTURES: &[DfgCase] = &[
    // x0 y1 x2 y3
    DfgCase { name: "parameter_flows_through_local", src: "int f(int x) { int y = x; return y; }", edges: &[(0, 2), (2, 1), (1, 3)] },
    // a0 b1 a2 b3 a4 b5 b6
    DfgCase {
        name: "if_else_join",
        src: "void f(int a) { int b = 0; if (a > 0) { b = a; } else { b = 1; } g(b); }",
        edges: &[(0, 2), (4, 3), (0, 4), (3, 6), (5, 6)],
    },
    // a0 b1 a2 b3 a4 b5
    DfgCase {
        name: "if_without_else_keeps_prior_definition",
        src: "void f(int a) { int b = 0; if (a > 0) { b = a; } g(b); }",
        edges: &[(0, 2), (4, 3), (0, 4), (1, 5), (3, 5)],
    },
    // n0 s1 n2 s3 s4 n5 n6 n7 s8
    DfgCase {
        name: "while_loop_back_edges",
        src: "int f(int n) { int s = 0; while (n > 0) { s = s + n; n = n - 1; } return s; }",
        edges: &[(0, 2), (6, 2), (1, 4), (3, 4), (0, 5), (6, 5), (4, 3), (5, 3), (0, 7), (6, 7), (7, 6), (1, 8), (3, 8)],
    },
    // a0 s1 i2 i3 a4 i5 s6 a7 i8 s9
    DfgCase {
        name: "for_loop_with_compound_assignment",
        src: "int f(int[] a) { int s = 0; for (int i = 0; i < a.length; i++) { s += a[i]; } return s; }",
        edges: &[(2, 3), (5, 3), (0, 4), (0, 7), (2, 8), (5, 8), (1, 6), (7, 6), (8, 6), (2, 5), (1, 9), (6, 9)],
    },
    // p0 d1 x2 p3 d4 p5 x6
    DfgCase {
        name: "field_access_and_receiver",
        src: "void f(Point p, int d) { int x = p.x + d; p.move(x); }",
        edges: &[(0, 3), (1, 4), (3, 2), (4, 2), (0, 5), (2, 6)],
    },
    // a0 b1 c2 a3 b4 c5
    DfgCase {
        name: "call_arguments_flow_into_target",
        src: "int f(int a, int b) { int c = max(a, b); return c; }",
        edges: &[(0, 3), (1, 4), (3, 2), (4, 2), (2, 5)],
    },
    // ok0 t1 t2 t3 t4
    DfgCase {
        name: "block_scoping_hides_inner_declaration",
        src: "void f() { if (ok) { int t = 1; use(t); } int t = 2; use(t); }",
        edges: &[(1, 2), (3, 4)],
    },
    // a0 b1 a2 a3 b4 b5 b6
    DfgCase {
        name: "conditional_expression",
        src: "int f(int a) { int b = a > 0 ? a : 0; b = b * 2; return b; }",
        edges: &[(0, 2), (0, 3), (2, 1), (3, 1), (1, 5), (5, 4), (4, 6)],
    },
    // s0 n1 n2 s3 e4 e5 n6
    DfgCase {
        name: "try_catch_merges_definitions",
        src: "void f(String s) { int n = 0; try { n = parse(s); } catch (Exception e) { log(e); } use(n); }",
        edges: &[(0, 3), (3, 2), (4, 5), (1, 6), (2, 6)],
    },
    // xs0 t1 x2 xs3 t4 t5 x6 t7
    DfgCase {
        name: "foreach_variable_comes_from_iterable",
        src: "int f(int[] xs) { int t = 0; for (int x : xs) { t = t + x; } return t; }",
        edges: &[(0, 3), (3, 2), (1, 5), (4, 5), (2, 6), (5, 4), (6, 4), (1, 7), (4, 7)],
    },
];

/// Compares the built graph with the expected edges.
pub fn check(case: &DfgCase) -> Result<(), String> {
    let decl = fixline_lang::parse_function(case.src).map_err(|e| format!("{}: {e}", case.name))?;
    let got = fixline_lang::build_dfg(&decl).edges;
    let want: std::collections::BTreeSet<(usize, usize)> = case.edges.iter().copied().collect();
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: expected {want:?}, got {got:?}", case.name))
    }
}
