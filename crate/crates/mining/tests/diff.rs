use fixline_mining::{split_hunks, Hunk, MiningError};
use proptest::prelude::*;

const TWO_HUNKS: &str = "\
diff --git a/src/A.java b/src/A.java
index 3b18e51..a1b2c3d 100644
--- a/src/A.java
+++ b/src/A.java
@@ -3,2 +3,2 @@ public class A {
-    int x = 1;
-    int y = 2;
+    int x = 10;
+    int y = 20;
@@ -10,0 +11,1 @@ void f() {
+        g();
";

#[test]
fn hand_parsed_fixture() {
    let hunks = split_hunks(TWO_HUNKS).unwrap();
    assert_eq!(hunks.len(), 2);
    assert_eq!(
        hunks[0],
        Hunk {
            file_path: "src/A.java".into(),
            old_path: Some("src/A.java".into()),
            old_range: (3, 2),
            new_range: (3, 2),
            removed_lines: vec!["    int x = 1;".into(), "    int y = 2;".into()],
            added_lines: vec!["    int x = 10;".into(), "    int y = 20;".into()],
            removed_at: vec![3, 4],
            added_at: vec![3, 4],
        }
    );
    assert_eq!(hunks[1].old_range, (10, 0));
    assert_eq!(hunks[1].new_range, (11, 1));
    assert!(hunks[1].is_pure_addition());
    assert_eq!(hunks[1].added_lines, vec!["        g();".to_string()]);
    assert_eq!(hunks[1].added_at, vec![11]);
}

#[test]
fn context_lines_and_default_counts() {
    let diff = "--- a/B.java\n+++ b/B.java\n@@ -5 +5 @@\n-a\n+b\n@@ -8,3 +8,2 @@\n keep\n-gone\n keep\n";
    let hunks = split_hunks(diff).unwrap();
    assert_eq!(hunks.len(), 2);
    assert_eq!((hunks[0].old_range, hunks[0].new_range), ((5, 1), (5, 1)));
    assert_eq!(hunks[1].removed_at, vec![9]);
    assert!(hunks[1].added_lines.is_empty());
}

#[test]
fn binary_sections_are_skipped() {
    let diff = "\
diff --git a/logo.png b/logo.png
index 1111111..2222222 100644
Binary files a/logo.png and b/logo.png differ
";
    assert!(split_hunks(diff).unwrap().is_empty());
    let mixed = format!("{diff}{TWO_HUNKS}");
    assert_eq!(split_hunks(&mixed).unwrap().len(), 2);
}

#[test]
fn added_and_deleted_files() {
    let diff = "\
diff --git a/N.java b/N.java
new file mode 100644
--- /dev/null
+++ b/N.java
@@ -0,0 +1,2 @@
+class N {
+}
diff --git a/O.java b/O.java
deleted file mode 100644
--- a/O.java
+++ /dev/null
@@ -1 +0,0 @@
-class O {}
";
    let hunks = split_hunks(diff).unwrap();
    assert_eq!(hunks[0].file_path, "N.java");
    assert_eq!(hunks[0].old_path, None);
    assert_eq!(hunks[0].added_at, vec![1, 2]);
    assert_eq!(hunks[1].file_path, "O.java");
    assert_eq!(hunks[1].new_range, (0, 0));
}

#[test]
fn missing_newline_marker() {
    let diff = "--- a/C.java\n+++ b/C.java\n@@ -1 +1 @@\n-x\n\\ No newline at end of file\n+y\n\\ No newline at end of file\n";
    let hunks = split_hunks(diff).unwrap();
    assert_eq!(hunks[0].removed_lines, vec!["x".to_string()]);
    assert_eq!(hunks[0].added_lines, vec!["y".to_string()]);
}

#[test]
fn malformed_diffs() {
    for bad in [
        "--- a/C.java\n+++ b/C.java\n@@ -1,2 +1,2 @@\n-x\n+y\n",
        "--- a/C.java\n+++ b/C.java\n@@ -1,x +1 @@\n-x\n+y\n",
        "--- a/C.java\n+++ b/C.java\n@@ -1 +1\n-x\n+y\n",
        "@@ -1 +1 @@\n-x\n+y\n",
        "--- a/C.java\n+++ b/C.java\n@@ -1,1 +1,1 @@\n-x\n-z\n",
    ] {
        assert!(matches!(split_hunks(bad), Err(MiningError::MalformedDiff { .. })), "{bad:?}");
    }
}

#[derive(Debug, Clone)]
enum Op {
    Keep,
    Remove,
    Add,
}

fn render(start_old: usize, start_new: usize, ops: &[Op]) -> String {
    let old = ops.iter().filter(|o| !matches!(o, Op::Add)).count();
    let new = ops.iter().filter(|o| !matches!(o, Op::Remove)).count();
    let mut s = format!("--- a/F.java\n+++ b/F.java\n@@ -{start_old},{old} +{start_new},{new} @@\n");
    for (i, o) in ops.iter().enumerate() {
        let c = match o {
            Op::Keep => ' ',
            Op::Remove => '-',
            Op::Add => '+',
        };
        s.push_str(&format!("{c}line {i}\n"));
    }
    s
}

proptest! {
    #[test]
    fn ranges_match_line_lists(
        start_old in 1usize..50,
        start_new in 1usize..50,
        ops in prop::collection::vec(prop_oneof![Just(Op::Keep), Just(Op::Remove), Just(Op::Add)], 1..20),
    ) {
        let hunks = split_hunks(&render(start_old, start_new, &ops)).unwrap();
        prop_assert_eq!(hunks.len(), 1);
        let h = &hunks[0];
        let keeps = ops.iter().filter(|o| matches!(o, Op::Keep)).count();
        prop_assert_eq!(h.old_range.1, h.removed_lines.len() + keeps);
        prop_assert_eq!(h.new_range.1, h.added_lines.len() + keeps);
        prop_assert_eq!(h.removed_at.len(), h.removed_lines.len());
        prop_assert_eq!(h.added_at.len(), h.added_lines.len());
        prop_assert!(h.removed_at.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(h.removed_at.iter().all(|&l| l >= start_old && l < start_old + h.old_range.1));
        prop_assert!(h.added_at.iter().all(|&l| l >= start_new && l < start_new + h.new_range.1));
    }
}
