//! MNIST IDX files and the small fixed patterns used by the demos.
//!
//! IDX3 (images): big-endian `u32` magic 2051, counts `[n, rows, cols]`, then
//! `n * rows * cols` pixel bytes. IDX1 (labels): magic 2049, count `n`, then
//! `n` label bytes. Pixels are scaled by 1/255 into `[0, 1]`; labels become
//! one-hot rows with column `d` marking digit `d`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;
pub const MNIST_CLASSES: usize = 10;

/// Named inputs with optional targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub inputs: Matrix,
    pub labels: Option<Matrix>,
    pub source: String,
}

impl Dataset {
    pub fn new(name: impl Into<String>, inputs: Matrix, labels: Option<Matrix>, source: impl Into<String>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.rows() != inputs.rows() {
                return Err(Error::shape("dataset", "inputs", inputs.shape(), "labels", l.shape()));
            }
        }
        if inputs.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain("dataset inputs must lie in [0, 1]"));
        }
        Ok(Dataset {
            name: name.into(),
            inputs,
            labels,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    /// First `n` rows (or all of them if there are fewer).
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            name: self.name.clone(),
            inputs: self.inputs.head_rows(n),
            labels: self.labels.as_ref().map(|l| l.head_rows(n)),
            source: self.source.clone(),
        }
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(offset, "file ends inside the header"))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Decodes an IDX3 image file into one row per image.
pub fn parse_mnist_images(bytes: &[u8]) -> Result<Matrix> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::format(0, format!("bad magic {magic}, expected {IMAGE_MAGIC}")));
    }
    let n = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let width = rows * cols;
    let expected = n
        .checked_mul(width)
        .ok_or_else(|| Error::format(4, "declared dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() != expected {
        return Err(Error::format(
            16 + payload.len().min(expected),
            format!("{n} images of {rows}x{cols} need {expected} pixel bytes, found {}", payload.len()),
        ));
    }
    let data = payload.iter().map(|&b| b as f64 / 255.0).collect();
    Matrix::from_vec(n, width, data)
}

/// Decodes an IDX1 label file into one-hot rows.
pub fn parse_mnist_labels(bytes: &[u8]) -> Result<Matrix> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::format(0, format!("bad magic {magic}, expected {LABEL_MAGIC}")));
    }
    let n = read_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != n {
        return Err(Error::format(
            8 + payload.len().min(n),
            format!("{n} labels declared, found {} bytes", payload.len()),
        ));
    }
    let mut out = Matrix::zeros(n, MNIST_CLASSES);
    for (r, &d) in payload.iter().enumerate() {
        if d as usize >= MNIST_CLASSES {
            return Err(Error::format(8 + r, format!("label byte {d} is not a digit")));
        }
        out.set(r, d as usize, 1.0);
    }
    Ok(out)
}

pub fn load_mnist_images(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_mnist_images(&read_file(path.as_ref())?)
}

pub fn load_mnist_labels(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_mnist_labels(&read_file(path.as_ref())?)
}

/// Encodes images as IDX3. Entries are mapped back to bytes by `round(x * 255)`.
pub fn encode_mnist_images(images: &Matrix, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if rows * cols != images.cols() {
        return Err(Error::domain(format!(
            "{rows}x{cols} images need {} columns, matrix has {}",
            rows * cols,
            images.cols()
        )));
    }
    let mut out = Vec::with_capacity(16 + images.as_slice().len());
    for v in [IMAGE_MAGIC, images.rows() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for &x in images.as_slice() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("pixel {x} outside [0, 1]")));
        }
        out.push((x * 255.0).round() as u8);
    }
    Ok(out)
}

/// Encodes one-hot rows as IDX1.
pub fn encode_mnist_labels(labels: &Matrix) -> Result<Vec<u8>> {
    if labels.cols() != MNIST_CLASSES || !crate::dbn::is_one_hot(labels) {
        return Err(Error::domain("labels must be one-hot rows of width 10"));
    }
    let mut out = Vec::with_capacity(8 + labels.rows());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.rows() as u32).to_be_bytes());
    for row in labels.row_iter() {
        out.push(row.iter().position(|&v| v == 1.0).unwrap() as u8);
    }
    Ok(out)
}

pub fn write_mnist_images(path: impl AsRef<Path>, images: &Matrix, rows: usize, cols: usize) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mnist_images(images, rows, cols)?).map_err(|e| Error::io(path, e))
}

pub fn write_mnist_labels(path: impl AsRef<Path>, labels: &Matrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mnist_labels(labels)?).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn stem(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

/// Finds the MNIST file for `split` in `dir`.
///
/// The distributed archives name files like `train-images.idx3-ubyte`, while
/// most mirrors use `train-images-idx3-ubyte`; both are accepted.
pub fn resolve_mnist_file(dir: &Path, split: Split, images: bool) -> Result<PathBuf> {
    let (kind, idx) = if images { ("images", "idx3") } else { ("labels", "idx1") };
    let candidates: Vec<PathBuf> = ["-", "."]
        .iter()
        .map(|sep| dir.join(format!("{}-{kind}{sep}{idx}-ubyte", split.stem())))
        .collect();
    candidates.iter().find(|p| p.is_file()).cloned().ok_or_else(|| {
        Error::io(
            &candidates[0],
            std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST file not found (tried '-' and '.' separators)"),
        )
    })
}

/// Loads one MNIST split from `dir`, keeping at most `limit` rows.
pub fn load_mnist(dir: impl AsRef<Path>, split: Split, limit: Option<usize>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let img_path = resolve_mnist_file(dir, split, true)?;
    let lab_path = resolve_mnist_file(dir, split, false)?;
    let inputs = load_mnist_images(&img_path)?;
    let labels = load_mnist_labels(&lab_path)?;
    let name = match split {
        Split::Train => "mnist-train",
        Split::Test => "mnist-test",
    };
    let ds = Dataset::new(name, inputs, Some(labels), img_path.display().to_string())?;
    Ok(match limit {
        Some(n) => ds.head(n),
        None => ds,
    })
}

pub const BUILTIN_NAMES: [&str; 6] = ["unsup-pattern", "pattern1", "pattern2", "ambiguous", "xor", "xor-real-test"];

const UNSUP_PATTERN: [[f64; 6]; 3] = [
    [1., 1., 0., 0., 0., 0.],
    [0., 0., 1., 1., 0., 0.],
    [0., 0., 0., 0., 1., 1.],
];

const PATTERN1: [[f64; 8]; 6] = [
    [0., 0., 0., 0., 0., 1., 0., 1.],
    [0., 0., 0., 0., 1., 0., 1., 0.],
    [0., 0., 0., 1., 0., 1., 0., 0.],
    [0., 0., 1., 0., 1., 0., 0., 0.],
    [0., 1., 0., 1., 0., 0., 0., 0.],
    [1., 0., 1., 0., 0., 0., 0., 0.],
];

const PATTERN2: [[f64; 8]; 8] = [
    [1., 1., 0., 0., 0., 0., 0., 0.],
    [0., 1., 1., 0., 0., 0., 0., 0.],
    [0., 0., 1., 1., 0., 0., 0., 0.],
    [0., 0., 0., 1., 1., 0., 0., 0.],
    [0., 0., 0., 0., 1., 1., 0., 0.],
    [0., 0., 0., 0., 0., 1., 1., 0.],
    [0., 0., 0., 0., 0., 0., 1., 1.],
    [1., 0., 0., 0., 0., 0., 0., 1.],
];

// The first two rows share inputs but disagree on labels.
const AMBIGUOUS: [[f64; 6]; 6] = [
    [0., 0., 0., 0., 0., 1.],
    [0., 0., 0., 0., 1., 0.],
    [0., 0., 0., 1., 0., 0.],
    [0., 0., 1., 0., 0., 0.],
    [0., 1., 0., 0., 0., 0.],
    [1., 0., 0., 0., 0., 0.],
];

fn split_columns<const C: usize>(rows: &[[f64; C]], inputs: usize) -> (Matrix, Matrix) {
    let m = Matrix::from_rows(rows).expect("builtin table is rectangular");
    (m.select_cols(0, inputs), m.select_cols(inputs, C))
}

/// One of the fixed example datasets, by name (see [`BUILTIN_NAMES`]).
pub fn builtin(name: &str) -> Result<Dataset> {
    let xor_labels = || Matrix::from_rows(&[[0.0], [1.0], [1.0], [0.0]]).unwrap();
    let (inputs, labels) = match name {
        "unsup-pattern" => (Matrix::from_rows(&UNSUP_PATTERN).unwrap(), None),
        "pattern1" => {
            let (x, y) = split_columns(&PATTERN1, 6);
            (x, Some(y))
        }
        "pattern2" => {
            let (x, y) = split_columns(&PATTERN2, 6);
            (x, Some(y))
        }
        "ambiguous" => {
            let (x, y) = split_columns(&AMBIGUOUS, 4);
            (x, Some(y))
        }
        "xor" => (
            Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap(),
            Some(xor_labels()),
        ),
        "xor-real-test" => (
            Matrix::from_rows(&[[0.1, 0.1], [0.0, 0.9], [1.0, 0.2], [0.8, 1.0]]).unwrap(),
            Some(xor_labels()),
        ),
        _ => {
            return Err(Error::UnknownDataset {
                name: name.to_string(),
                valid: BUILTIN_NAMES.to_vec(),
            })
        }
    };
    Dataset::new(name, inputs, labels, "builtin")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn image_file(n: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IMAGE_MAGIC, n, rows, cols] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(pixels);
        b
    }

    #[test]
    fn all_white_image_scales_to_ones() {
        let m = parse_mnist_images(&image_file(1, 28, 28, &[255; 784])).unwrap();
        assert_eq!(m.shape(), (1, 784));
        assert!(m.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn image_rows_are_row_major() {
        let m = parse_mnist_images(&image_file(2, 1, 3, &[0, 51, 255, 102, 0, 0])).unwrap();
        assert_eq!(m.row(0), &[0.0, 0.2, 1.0]);
        assert_eq!(m.row(1), &[0.4, 0.0, 0.0]);
    }

    #[test]
    fn image_format_errors() {
        let mut bad = image_file(1, 1, 1, &[0]);
        bad[3] = 0x01;
        assert!(matches!(parse_mnist_images(&bad), Err(Error::Format { offset: 0, .. })));
        assert!(matches!(parse_mnist_images(&image_file(2, 1, 2, &[0, 0, 0])), Err(Error::Format { .. })));
        assert!(matches!(parse_mnist_images(&image_file(1, 1, 1, &[0, 0])), Err(Error::Format { .. })));
        assert!(parse_mnist_images(&[0, 0, 8]).is_err());
        // A label file is not an image file.
        let labels = encode_mnist_labels(&Matrix::zeros(0, 10)).unwrap();
        assert!(matches!(parse_mnist_images(&labels), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn label_examples() {
        let mut b = LABEL_MAGIC.to_be_bytes().to_vec();
        b.extend_from_slice(&3u32.to_be_bytes());
        b.extend_from_slice(&[0, 7, 2]);
        let m = parse_mnist_labels(&b).unwrap();
        assert_eq!(m.row(0), &[1., 0., 0., 0., 0., 0., 0., 0., 0., 0.]);
        assert_eq!(m.row(1), &[0., 0., 0., 0., 0., 0., 0., 1., 0., 0.]);
        assert_eq!(m.row(2)[2], 1.0);

        let last = b.len() - 1;
        b[last] = 10;
        assert!(matches!(parse_mnist_labels(&b), Err(Error::Format { offset, .. }) if offset == last));
        b.pop();
        assert!(parse_mnist_labels(&b).is_err());
    }

    #[test]
    fn file_round_trip_and_name_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let images = Matrix::from_rows(&[[0.0, 1.0, 0.2, 0.4], [1.0, 1.0, 0.0, 0.6]]).unwrap();
        let labels = Matrix::from_rows(&[
            [0., 0., 0., 1., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0., 1.],
        ])
        .unwrap();
        write_mnist_images(dir.path().join("t10k-images.idx3-ubyte"), &images, 2, 2).unwrap();
        write_mnist_labels(dir.path().join("t10k-labels-idx1-ubyte"), &labels).unwrap();
        let ds = load_mnist(dir.path(), Split::Test, None).unwrap();
        assert_eq!(ds.inputs, images);
        assert_eq!(ds.labels.as_ref().unwrap(), &labels);
        assert_eq!(load_mnist(dir.path(), Split::Test, Some(1)).unwrap().len(), 1);
        assert!(matches!(load_mnist(dir.path(), Split::Train, None), Err(Error::Io { .. })));
    }

    #[test]
    fn builtin_tables() {
        let xor = builtin("xor").unwrap();
        assert_eq!(xor.labels.unwrap().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let unsup = builtin("unsup-pattern").unwrap();
        assert_eq!(unsup.inputs.shape(), (3, 6));
        assert_eq!(unsup.inputs.row(2), &[0., 0., 0., 0., 1., 1.]);
        assert!(unsup.labels.is_none());
        assert_eq!(builtin("xor-real-test").unwrap().inputs.row(3), &[0.8, 1.0]);

        let p1 = builtin("pattern1").unwrap();
        assert_eq!((p1.inputs.shape(), p1.labels.unwrap().shape()), ((6, 6), (6, 2)));
        let p2 = builtin("pattern2").unwrap();
        assert_eq!((p2.inputs.shape(), p2.labels.unwrap().shape()), ((8, 6), (8, 2)));
        let amb = builtin("ambiguous").unwrap();
        let labels = amb.labels.unwrap();
        assert_eq!(amb.inputs.row(0), amb.inputs.row(1));
        assert_ne!(labels.row(0), labels.row(1));
        assert_eq!(labels.shape(), (6, 2));
    }

    #[test]
    fn builtin_unknown_lists_names() {
        let err = builtin("mnist").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::UnknownDataset { .. }));
        for name in BUILTIN_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn builtins_satisfy_invariants() {
        for name in BUILTIN_NAMES {
            let ds = builtin(name).unwrap();
            assert!(Dataset::new(name, ds.inputs.clone(), ds.labels.clone(), "check").is_ok());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn idx_round_trip(n in 1usize..6, rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            let mut rng = crate::numerics::RngState::new(seed);
            let bytes: Vec<u8> = (0..n * rows * cols).map(|_| (rng.uniform() * 256.0) as u8).collect();
            let m = parse_mnist_images(&image_file(n as u32, rows as u32, cols as u32, &bytes)).unwrap();
            let again = parse_mnist_images(&encode_mnist_images(&m, rows, cols).unwrap()).unwrap();
            prop_assert_eq!(m, again);
        }

        #[test]
        fn truncation_is_rejected(n in 1usize..5, side in 1usize..5, cut_seed in any::<u64>()) {
            let full = image_file(n as u32, side as u32, side as u32, &vec![7; n * side * side]);
            let cut = (cut_seed % full.len() as u64) as usize;
            prop_assert!(parse_mnist_images(&full[..cut]).is_err());

            let mut labels = LABEL_MAGIC.to_be_bytes().to_vec();
            labels.extend_from_slice(&(n as u32).to_be_bytes());
            labels.extend(std::iter::repeat(3).take(n));
            let cut = (cut_seed % labels.len() as u64) as usize;
            prop_assert!(parse_mnist_labels(&labels[..cut]).is_err());
        }
    }
}
