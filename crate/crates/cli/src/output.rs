//! Atomic output files: everything is staged in memory and committed at the
//! end, so a failed run leaves no partial files behind.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

#[derive(Default)]
pub struct Outputs {
    staged: Vec<(Option<PathBuf>, Vec<u8>)>,
}

impl Outputs {
    /// Stages `bytes` for `path`, or for standard output when `path` is `None`.
    pub fn stage(&mut self, path: Option<&Path>, bytes: impl Into<Vec<u8>>) {
        self.staged.push((path.map(Path::to_path_buf), bytes.into()));
    }

    pub fn commit(self) -> io::Result<()> {
        let mut written: Vec<PathBuf> = Vec::new();
        let mut stdout = Vec::new();
        for (path, bytes) in self.staged {
            match path {
                None => stdout.extend(bytes),
                Some(p) => {
                    if let Err(e) = write_atomic(&p, &bytes) {
                        for done in &written {
                            let _ = std::fs::remove_file(done);
                        }
                        return Err(e);
                    }
                    written.push(p);
                }
            }
        }
        let mut out = io::stdout().lock();
        out.write_all(&stdout)?;
        out.flush()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
