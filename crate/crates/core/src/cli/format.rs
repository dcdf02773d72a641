//! Fixed text formatting for written artifacts.

/// 17 significant digits in scientific notation, e.g. `5.0000000000000000e-1`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV line terminated by `\n`.
pub fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    let mut line = fields.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Pretty JSON with a trailing newline.
pub fn json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
    s.push('\n');
    s
}
