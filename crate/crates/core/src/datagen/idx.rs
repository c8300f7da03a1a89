//! Reader for the big-endian IDX container used by MNIST.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Truncated(format!(
                "{} needs {} more bytes at offset {}, only {} left",
                self.what,
                n,
                self.pos,
                self.bytes.len() - self.pos
            ))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let found = self.u32()?;
        if found != expected {
            return Err(Error::BadMagic { found, expected });
        }
        Ok(())
    }
}

/// Images flattened row-major with pixels scaled to `[0, 1]`.
pub fn parse_idx_images<T: Scalar>(bytes: &[u8]) -> Result<Vec<Vec<T>>> {
    let mut c = Cursor { bytes, pos: 0, what: "image file" };
    c.magic(IMAGES_MAGIC)?;
    let count = c.u32()? as usize;
    let rows = c.u32()? as usize;
    let cols = c.u32()? as usize;
    let size = rows * cols;
    let scale = T::one() / T::of(255.0);
    (0..count)
        .map(|_| Ok(c.take(size)?.iter().map(|&p| T::of(f64::from(p)) * scale).collect()))
        .collect()
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut c = Cursor { bytes, pos: 0, what: "label file" };
    c.magic(LABELS_MAGIC)?;
    let count = c.u32()? as usize;
    Ok(c.take(count)?.to_vec())
}

/// Loads an image file and its label file, which must have equal counts.
pub fn load_idx<T: Scalar>(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<(Vec<Vec<T>>, Vec<u8>)> {
    let images = parse_idx_images(&std::fs::read(images_path)?)?;
    let labels = parse_idx_labels(&std::fs::read(labels_path)?)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok((images, labels))
}
