// Copyright 2026 The hijack-impact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


//! Output files are written to a temporary sibling and renamed into place
//! only when the command succeeds.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub struct Output {
    target: Option<(PathBuf, BufWriter<NamedTempFile>)>,
    stdout: io::Stdout,
}

impl Output {
    /// Standard output when `path` is `None` or `-`.
    pub fn create(path: Option<&Path>) -> CliResult<Self> {
        let target = match path {
            None => None,
            Some(p) if p == Path::new("-") => None,
            Some(p) => {
                let dir = match p.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d,
                    _ => Path::new("."),
                };
                let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
                Some((p.to_path_buf(), BufWriter::new(tmp)))
            }
        };
        Ok(Output {
            target,
            stdout: io::stdout(),
        })
    }

    /// Flushes and moves the file into place.
    pub fn commit(self) -> CliResult<()> {
        match self.target {
            None => {
                self.stdout.lock().flush().map_err(|e| CliError::Data(e.to_string()))?;
            }
            Some((path, w)) => {
                let tmp = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
                tmp.persist(&path)
                    .map_err(|e| CliError::Data(format!("{}: {}", path.display(), e.error)))?;
            }
        }
        Ok(())
    }
}

impl Write for Output {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match &mut self.target {
            Some((_, w)) => w.write(buf),
            None => self.stdout.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match &mut self.target {
            Some((_, w)) => w.flush(),
            None => self.stdout.flush(),
        }
    }
}
