//! `export`: the session directory as a zip archive.

use std::fs::File;
use std::io::{self, Write};

use recorder_core::store::read_manifest;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipWriter};

use super::emit;
use crate::failure::{store_failure, ExitKind, Failure};
use crate::ExportArgs;

pub fn run(args: &ExportArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let dir = &args.session;
    let manifest = read_manifest(dir).map_err(|e| store_failure(dir, e))?;
    let prefix = manifest.session_id.to_string();
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Failure::io(dir, e.into()))?;
        if entry.file_type().is_file() {
            files.push(entry.into_path());
        }
    }

    let file = File::create(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let mut zip = ZipWriter::new(file);
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .large_file(true);
    let zip_err = |e: zip::result::ZipError| {
        Failure::new(ExitKind::Io, e.to_string()).with("path", &args.out)
    };
    let mut bytes = 0u64;
    for path in &files {
        let rel = path
            .strip_prefix(dir)
            .expect("walk stays under the session");
        let name: Vec<_> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect();
        zip.start_file(format!("{prefix}/{}", name.join("/")), options)
            .map_err(zip_err)?;
        let mut src = File::open(path).map_err(|e| Failure::io(path, e))?;
        bytes += io::copy(&mut src, &mut zip).map_err(|e| Failure::io(&args.out, e))?;
    }
    zip.finish().map_err(zip_err)?;
    emit(
        out,
        format_args!(
            "exported {} files ({bytes} bytes) to {}",
            files.len(),
            args.out.display()
        ),
    )
}
