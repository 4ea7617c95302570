use fixline_lang::{parse_file, FileFunction, FunctionDecl, ParseError};

/// Innermost function whose lines cover `line`, if any.
pub fn enclosing(functions: &[FileFunction], line: usize) -> Option<&FileFunction> {
    functions
        .iter()
        .filter(|f| f.first_line <= line && line <= f.last_line)
        .min_by_key(|f| (f.last_line - f.first_line, std::cmp::Reverse(f.first_line)))
}

/// The parsed function enclosing `line` of `file_text`. Files that do not
/// lex and functions that do not parse yield `None` with a logged warning.
pub fn locate_enclosing_function(file_text: &str, line: usize) -> Option<FunctionDecl> {
    let functions = match parse_file(file_text) {
        Ok(f) => f,
        Err(e) => {
            log::warn!("skipping unparseable file: {e}");
            return None;
        }
    };
    match &enclosing(&functions, line)?.parsed {
        Ok(decl) => Some(decl.clone()),
        Err(e) => {
            log::warn!("skipping unparseable function: {e}");
            None
        }
    }
}

/// Source text of a function parsed out of `file_text`.
pub fn function_source(file_text: &str, decl: &FunctionDecl) -> String {
    file_text[decl.source_span.0..decl.source_span.1].to_string()
}

fn param_types(decl: &FunctionDecl) -> Vec<&str> {
    decl.params.iter().map(|p| p.type_name.as_str()).collect()
}

/// The function of `functions` with the same name and parameter types as
/// `like`, or the only one with that name.
pub fn same_function<'a>(functions: &'a [FileFunction], like: &FunctionDecl) -> Option<&'a FunctionDecl> {
    let named: Vec<&FunctionDecl> =
        functions.iter().filter(|f| f.name == like.name).filter_map(|f| f.parsed.as_ref().ok()).collect();
    let want = param_types(like);
    named.iter().copied().find(|d| param_types(d) == want).or(if named.len() == 1 { Some(named[0]) } else { None })
}

pub fn functions_in(file_text: &str) -> Result<Vec<FileFunction>, ParseError> {
    parse_file(file_text)
}
