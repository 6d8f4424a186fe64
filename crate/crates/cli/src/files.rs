use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mvreturn::artifact::ArtifactKind;

use crate::fail::{Failure, Outcome};

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Outcome<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Failure::io(dir.display(), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Failure::io(dir.display(), e))?;
    tmp.write_all(contents).map_err(|e| Failure::io(path.display(), e))?;
    tmp.as_file().sync_all().map_err(|e| Failure::io(path.display(), e))?;
    tmp.persist(path).map_err(|e| Failure::io(path.display(), e.error))?;
    Ok(())
}

fn describe(kind: ArtifactKind) -> &'static str {
    match kind {
        ArtifactKind::Panel => "panel",
        ArtifactKind::Indicators => "indicator",
        ArtifactKind::Summaries => "summary",
    }
}

/// Opens an artifact from `dir`. A missing file is a usage problem (an
/// earlier stage was not run), so it is reported as validation, not I/O.
pub fn open_artifact(dir: &Path, kind: ArtifactKind) -> Outcome<fs::File> {
    let path = dir.join(kind.file_name());
    if !path.is_file() {
        return Err(Failure::validation(
            "MissingArtifact",
            format!("missing {} file {}; run the earlier stage first", describe(kind), path.display()),
        ));
    }
    fs::File::open(&path).map_err(|e| Failure::io(path.display(), e))
}

pub fn write_artifact_file(
    dir: &Path,
    kind: ArtifactKind,
    write: impl FnOnce(&mut Vec<u8>) -> mvreturn::Result<()>,
) -> Outcome<PathBuf> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    let path = dir.join(kind.file_name());
    write_atomic(&path, &buf)?;
    Ok(path)
}
