//! Little-endian primitives shared by the binary cache and checkpoint
//! formats, with read errors that name the offending file.

use std::path::Path;

use crate::error::{CliError, Result};

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8], path: &'a Path) -> Self {
        Self { buf, pos: 0, path }
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&end| end <= self.buf.len());
        match end {
            Some(end) => {
                let slice = &self.buf[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(CliError::in_file(self.path, "file is truncated")),
        }
    }

    pub(crate) fn expect_magic(&mut self, magic: &[u8; 4], kind: &str) -> Result<()> {
        if self.bytes(4)? != magic {
            return Err(CliError::in_file(self.path, format!("not a {kind} file")));
        }
        Ok(())
    }

    pub(crate) fn expect_version(&mut self, supported: u16) -> Result<()> {
        let found = self.u16()?;
        if found != supported {
            return Err(CliError::in_file(
                self.path,
                format!("format version {found} is not supported (expected {supported})"),
            ));
        }
        Ok(())
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(CliError::in_file(self.path, "trailing bytes after payload"));
        }
        Ok(())
    }

    pub(crate) fn len_field(&mut self, what: &str) -> Result<usize> {
        let raw = self.u64()?;
        usize::try_from(raw)
            .ok()
            .filter(|&n| n <= self.buf.len())
            .ok_or_else(|| CliError::in_file(self.path, format!("{what} length {raw} is implausible")))
    }

    pub(crate) fn path(&self) -> &'a Path {
        self.path
    }
}

pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub(crate) fn new(magic: &[u8; 4], version: u16) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(magic);
        buf.extend_from_slice(&version.to_le_bytes());
        Self { buf }
    }

    pub(crate) fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub(crate) fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub(crate) fn write_to(self, path: &Path) -> Result<()> {
        std::fs::write(path, &self.buf).map_err(|e| CliError::in_file(path, e))
    }
}
