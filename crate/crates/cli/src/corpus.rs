//! The bundled example programs. A file argument that names no file on
//! disk is looked up here, so `run fig2a.tsia` works from any directory.

use std::path::Path;

pub const CORPUS: &[(&str, &str)] = &[
    ("fig2a.tsia", include_str!("../corpus/fig2a.tsia")),
    ("fib.tsia", include_str!("../corpus/fib.tsia")),
    ("sum.tsia", include_str!("../corpus/sum.tsia")),
    ("esum.tsia", include_str!("../corpus/esum.tsia")),
    ("dcvsum.tsia", include_str!("../corpus/dcvsum.tsia")),
    ("putab.tsia", include_str!("../corpus/putab.tsia")),
];

/// Bundled source by file name, with or without the extension.
pub fn bundled(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".tsia").unwrap_or(name);
    CORPUS.iter().find(|(f, _)| f.strip_suffix(".tsia") == Some(stem)).map(|(_, src)| *src)
}

/// Reads `path` from disk, falling back to the bundled corpus.
pub fn load(path: &Path) -> std::io::Result<String> {
    match std::fs::read_to_string(path) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            path.to_str().and_then(bundled).map(str::to_string).ok_or(e)
        }
        r => r,
    }
}
