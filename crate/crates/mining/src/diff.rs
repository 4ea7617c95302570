use serde::Serialize;

use crate::error::MiningError;

/// One `@@` section of a unified diff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hunk {
    /// Path after the change, or before it for deleted files.
    pub file_path: String,
    /// Path before the change; `None` for added files.
    pub old_path: Option<String>,
    /// `(start_line, line_count)` in the old file.
    pub old_range: (usize, usize),
    pub new_range: (usize, usize),
    pub removed_lines: Vec<String>,
    pub added_lines: Vec<String>,
    /// 1-based old-file line of each removed line.
    pub removed_at: Vec<usize>,
    /// 1-based new-file line of each added line.
    pub added_at: Vec<usize>,
}

impl Hunk {
    pub fn is_pure_addition(&self) -> bool {
        self.removed_lines.is_empty()
    }
}

struct Section {
    old_path: Option<String>,
    new_path: Option<String>,
    binary: bool,
}

struct Open {
    hunk: Hunk,
    old_left: usize,
    new_left: usize,
    old_line: usize,
    new_line: usize,
}

fn malformed(line: usize, reason: impl Into<String>) -> MiningError {
    MiningError::MalformedDiff { line, reason: reason.into() }
}

fn strip_prefix_path(p: &str) -> Option<String> {
    let p = p.split('\t').next().unwrap_or(p).trim_end();
    if p == "/dev/null" {
        return None;
    }
    Some(p.strip_prefix("a/").or_else(|| p.strip_prefix("b/")).unwrap_or(p).to_string())
}

fn parse_range(s: &str, sign: char, line: usize) -> Result<(usize, usize), MiningError> {
    let body = s.strip_prefix(sign).ok_or_else(|| malformed(line, format!("expected range starting with {sign}")))?;
    let num = |t: &str| t.parse::<usize>().map_err(|_| malformed(line, format!("bad range number {t:?}")));
    match body.split_once(',') {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => Ok((num(body)?, 1)),
    }
}

type LineRange = (usize, usize);

fn parse_header(text: &str, line: usize) -> Result<(LineRange, LineRange), MiningError> {
    let rest = text.strip_prefix("@@ ").ok_or_else(|| malformed(line, "bad hunk header"))?;
    let end = rest.find(" @@").ok_or_else(|| malformed(line, "unterminated hunk header"))?;
    let mut parts = rest[..end].split_whitespace();
    let old = parse_range(parts.next().unwrap_or(""), '-', line)?;
    let new = parse_range(parts.next().unwrap_or(""), '+', line)?;
    if parts.next().is_some() {
        return Err(malformed(line, "combined diffs are not supported"));
    }
    Ok((old, new))
}

/// Splits a unified diff into hunks. Binary file sections are skipped.
pub fn split_hunks(unified_diff: &str) -> Result<Vec<Hunk>, MiningError> {
    let mut hunks = Vec::new();
    let mut section: Option<Section> = None;
    let mut open: Option<Open> = None;
    for (idx, text) in unified_diff.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(o) = open.as_mut() {
            if o.old_left > 0 || o.new_left > 0 {
                match text.chars().next() {
                    Some(' ') | None => {
                        if o.old_left == 0 || o.new_left == 0 {
                            return Err(malformed(lineno, "context line beyond the hunk's ranges"));
                        }
                        o.old_left -= 1;
                        o.new_left -= 1;
                        o.old_line += 1;
                        o.new_line += 1;
                    }
                    Some('-') => {
                        if o.old_left == 0 {
                            return Err(malformed(lineno, "removed line beyond the old range"));
                        }
                        o.hunk.removed_lines.push(text[1..].to_string());
                        o.hunk.removed_at.push(o.old_line);
                        o.old_left -= 1;
                        o.old_line += 1;
                    }
                    Some('+') => {
                        if o.new_left == 0 {
                            return Err(malformed(lineno, "added line beyond the new range"));
                        }
                        o.hunk.added_lines.push(text[1..].to_string());
                        o.hunk.added_at.push(o.new_line);
                        o.new_left -= 1;
                        o.new_line += 1;
                    }
                    Some('\\') => {}
                    _ => return Err(malformed(lineno, "hunk ends before its ranges are covered")),
                }
                continue;
            }
            if text.starts_with('\\') {
                continue;
            }
            hunks.push(open.take().expect("open hunk").hunk);
        }
        if let Some(rest) = text.strip_prefix("diff --git ") {
            section = Some(Section { old_path: None, new_path: None, binary: false });
            let mut paths = rest.split_whitespace();
            if let (Some(a), Some(b)) = (paths.next(), paths.next()) {
                let s = section.as_mut().expect("just set");
                s.old_path = strip_prefix_path(a);
                s.new_path = strip_prefix_path(b);
            }
        } else if let Some(p) = text.strip_prefix("--- ") {
            let s = section.get_or_insert(Section { old_path: None, new_path: None, binary: false });
            s.old_path = strip_prefix_path(p);
        } else if let Some(p) = text.strip_prefix("+++ ") {
            let s = section.as_mut().ok_or_else(|| malformed(lineno, "+++ without ---"))?;
            s.new_path = strip_prefix_path(p);
        } else if text.starts_with("Binary files ") || text.starts_with("GIT binary patch") {
            if let Some(s) = section.as_mut() {
                s.binary = true;
            }
        } else if text.starts_with("@@") {
            let s = section.as_ref().ok_or_else(|| malformed(lineno, "hunk outside a file section"))?;
            if s.binary {
                continue;
            }
            let file_path = s
                .new_path
                .clone()
                .or_else(|| s.old_path.clone())
                .ok_or_else(|| malformed(lineno, "hunk without file paths"))?;
            let (old_range, new_range) = parse_header(text, lineno)?;
            open = Some(Open {
                hunk: Hunk {
                    file_path,
                    old_path: s.old_path.clone(),
                    old_range,
                    new_range,
                    removed_lines: Vec::new(),
                    added_lines: Vec::new(),
                    removed_at: Vec::new(),
                    added_at: Vec::new(),
                },
                old_left: old_range.1,
                new_left: new_range.1,
                old_line: old_range.0.max(1),
                new_line: new_range.0.max(1),
            });
        } else if matches!(text.chars().next(), Some('+' | '-' | ' ')) && section.is_none() {
            return Err(malformed(lineno, "change line outside a hunk"));
        }
    }
    if let Some(o) = open {
        if o.old_left > 0 || o.new_left > 0 {
            return Err(malformed(unified_diff.lines().count(), "diff ends inside a hunk"));
        }
        hunks.push(o.hunk);
    }
    Ok(hunks)
}
