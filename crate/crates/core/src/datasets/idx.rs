//! IDX binary container (the MNIST on-disk format) and digit-pair task
//! construction.
//!
//! Big-endian throughout: an image file is magic 2051, count, rows, cols as
//! 32-bit words followed by row-major pixel bytes; a label file is magic
//! 2049, count, then label bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, LabeledExample};

pub const IMAGES_MAGIC: u32 = 2051;
pub const LABELS_MAGIC: u32 = 2049;

/// A parsed IDX image file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImageSet {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// count * rows * cols bytes, row-major per image.
    pub pixels: Vec<u8>,
}

impl IdxImageSet {
    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[i * size..(i + 1) * size]
    }
}

fn read_u32(data: &[u8], offset: usize, what: &str) -> Result<u32> {
    let end = offset + 4;
    let bytes = data
        .get(offset..end)
        .ok_or_else(|| Error::TruncatedFile(format!("missing {what}")))?;
    Ok(u32::from_be_bytes(bytes.try_into().unwrap()))
}

pub fn load_idx_images<P: AsRef<Path>>(path: P) -> Result<IdxImageSet> {
    let data = fs::read(path)?;
    let magic = read_u32(&data, 0, "image magic")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGES_MAGIC,
            got: magic,
        });
    }
    let count = read_u32(&data, 4, "image count")? as usize;
    let rows = read_u32(&data, 8, "row count")? as usize;
    let cols = read_u32(&data, 12, "column count")? as usize;
    let need = 16 + count * rows * cols;
    if data.len() < need {
        return Err(Error::TruncatedFile(format!(
            "expected {need} bytes for {count} images of {rows}x{cols}, file has {}",
            data.len()
        )));
    }
    Ok(IdxImageSet {
        count,
        rows,
        cols,
        pixels: data[16..need].to_vec(),
    })
}

pub fn load_idx_labels<P: AsRef<Path>>(path: P) -> Result<Vec<u8>> {
    let data = fs::read(path)?;
    let magic = read_u32(&data, 0, "label magic")?;
    if magic != LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: LABELS_MAGIC,
            got: magic,
        });
    }
    let count = read_u32(&data, 4, "label count")? as usize;
    let need = 8 + count;
    if data.len() < need {
        return Err(Error::TruncatedFile(format!(
            "expected {need} bytes for {count} labels, file has {}",
            data.len()
        )));
    }
    Ok(data[8..need].to_vec())
}

pub fn write_idx_images<P: AsRef<Path>>(set: &IdxImageSet, path: P) -> Result<()> {
    let mut out = Vec::with_capacity(16 + set.pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(set.count as u32).to_be_bytes());
    out.extend_from_slice(&(set.rows as u32).to_be_bytes());
    out.extend_from_slice(&(set.cols as u32).to_be_bytes());
    out.extend_from_slice(&set.pixels);
    fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels<P: AsRef<Path>>(labels: &[u8], path: P) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out)?;
    Ok(())
}

/// Build the binary regression task for one digit pair: keep only the two
/// digits, scale pixel p to 2p/255 - 1 in [-1, 1], and label digit_a as -1
/// and digit_b as +1.
pub fn make_pair_task(
    images: &IdxImageSet,
    labels: &[u8],
    digit_a: u8,
    digit_b: u8,
) -> Result<Dataset> {
    if digit_a == digit_b || digit_a > 9 || digit_b > 9 {
        return Err(Error::InvalidArgument(format!(
            "digit pair ({digit_a}, {digit_b}) must be two distinct digits in 0..=9"
        )));
    }
    if images.count != labels.len() {
        return Err(Error::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    let mut examples = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let y = if label == digit_a {
            -1.0
        } else if label == digit_b {
            1.0
        } else {
            continue;
        };
        let x: Vec<f64> = images
            .image(i)
            .iter()
            .map(|&p| 2.0 * p as f64 / 255.0 - 1.0)
            .collect();
        examples.push(LabeledExample::new(x, y)?);
    }
    if examples.is_empty() {
        return Err(Error::EmptySelection {
            a: digit_a,
            b: digit_b,
        });
    }
    Dataset::new(examples)
}
