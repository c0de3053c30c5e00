use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "SURFGL_OUT";

/// `--out`, else `$SURFGL_OUT`, else `./surfgl-out`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("surfgl-out")),
    }
}

/// A directory receiving the files of one command.
#[derive(Clone, Debug)]
pub struct OutDir {
    pub dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: PathBuf) -> Result<Self, Failure> {
        fs::create_dir_all(&dir).map_err(|e| Failure::new(crate::exit::OTHER, format!("{}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes through a temporary file and renames it into place, so a
    /// reader never sees a partial file.
    pub fn write(
        &self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> Result<(), Failure>,
    ) -> Result<PathBuf, Failure> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let path = self.path(name);
        let file = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = path.with_file_name(format!(".{file}.tmp"));
        let io = |e: std::io::Error| Failure::new(crate::exit::OTHER, format!("{}: {e}", path.display()));
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(&buf).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        self.write(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)
                .map_err(|e| Failure::new(crate::exit::OTHER, e.to_string()))?;
            buf.push(b'\n');
            Ok(())
        })
    }
}
