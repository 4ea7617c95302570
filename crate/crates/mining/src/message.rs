use serde::Serialize;

/// Keywords that mark a commit as a defect fix. `buy` is kept next to
/// `bug` because the original keyword list spells it that way.
pub const BUG_KEYWORDS: &[&str] =
    &["error", "bug", "buy", "fix", "issue", "mistake", "incorrect", "fault", "defect", "flaw", "type"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommitKind {
    BugFixing,
    NonBugFixing,
}

/// A commit fixes a defect iff some word of its message starts with a
/// keyword, so "fixes" and "Fixed" count but "prefix" and "prototype" do
/// not.
pub fn classify_commit_message(message: &str) -> CommitKind {
    let lower = message.to_lowercase();
    let hit = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .any(|w| BUG_KEYWORDS.iter().any(|k| w.starts_with(k)));
    if hit {
        CommitKind::BugFixing
    } else {
        CommitKind::NonBugFixing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_start_matching() {
        assert_eq!(classify_commit_message("Fix NPE in parser"), CommitKind::BugFixing);
        assert_eq!(classify_commit_message("Add caching layer"), CommitKind::NonBugFixing);
        assert_eq!(classify_commit_message("Refactor type hierarchy"), CommitKind::BugFixing);
        assert_eq!(classify_commit_message("fixes #12"), CommitKind::BugFixing);
        assert_eq!(classify_commit_message("Handle IO_ERROR codes"), CommitKind::BugFixing);
        assert_eq!(classify_commit_message("Add prefix to prototype names"), CommitKind::NonBugFixing);
        assert_eq!(classify_commit_message(""), CommitKind::NonBugFixing);
    }
}
