//! Writes the segment, manifest and payload JSON Schemas to a directory.
//!
//! cargo run -p recorder-core --example dump_schemas -- [out-dir]

use recorder_core::model::schema::{dump_schemas, write_schemas};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("recorder-schemas"));
    for path in write_schemas(&dir, &dump_schemas())? {
        println!("{}", path.display());
    }
    Ok(())
}
