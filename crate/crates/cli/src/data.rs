use std::fs;
use std::path::Path;

use nlflow_core::dataflow::Table;
use nlflow_core::{Error, Result};

/// Reads one table; `.tsv` files are tab separated, anything else comma
/// separated. The table is named after the file stem.
pub fn load_table(path: &Path) -> Result<Table> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Io(format!("{}: no usable file name", path.display())))?;
    let delimiter = match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => b'\t',
        _ => b',',
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Table::from_text(name, &text, delimiter)
}

/// Every `.csv` and `.tsv` file in `dir`, or the single file `dir` names.
pub fn load_tables(dir: &Path) -> Result<Vec<Table>> {
    if dir.is_file() {
        return Ok(vec![load_table(dir)?]);
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "tsv")) {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| load_table(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_directories_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.tsv"), "x\ty\n1\t2\n").unwrap();
        fs::write(dir.path().join("a.csv"), "x,y\n1,2\n3,4\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let tables = load_tables(dir.path()).unwrap();
        let names: Vec<_> = tables.iter().map(|t| (t.name.as_str(), t.row_count())).collect();
        assert_eq!(names, [("a", 2), ("b", 1)]);
        assert!(load_tables(&dir.path().join("missing")).is_err());
    }
}
