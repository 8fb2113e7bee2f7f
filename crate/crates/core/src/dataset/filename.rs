//! Filename convention `<pid>_c<cam>_t<secs>_frame<frame>_<bbox>[.jpg|.png]`.

use super::{CameraId, DatasetError, ImageRecord};

/// Zero-padded width of the frame field in emitted filenames.
pub const DEFAULT_FRAME_WIDTH: usize = 7;

const EXTENSIONS: [&str; 2] = [".jpg", ".png"];

fn malformed(name: &str, reason: impl Into<String>) -> DatasetError {
    DatasetError::MalformedFilename {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn parse_digits<T: std::str::FromStr>(name: &str, field: &str, digits: &str) -> Result<T, DatasetError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed(name, format!("{field} is not a base-10 integer: {digits:?}")));
    }
    digits
        .parse()
        .map_err(|_| malformed(name, format!("{field} out of range: {digits:?}")))
}

/// Parses the metadata encoded in an image filename. The returned record has
/// no feature attached.
pub fn parse_image_filename(name: &str) -> Result<ImageRecord, DatasetError> {
    let stem = EXTENSIONS
        .iter()
        .find_map(|ext| name.strip_suffix(ext))
        .unwrap_or(name);

    let tokens: Vec<&str> = stem.split('_').collect();
    if tokens.len() != 5 {
        return Err(malformed(name, format!("expected 5 '_'-separated tokens, found {}", tokens.len())));
    }

    let person_id = parse_digits(name, "person id", tokens[0])?;
    let camera = CameraId::parse(tokens[1]).map_err(|_| malformed(name, format!("bad camera token {:?}", tokens[1])))?;
    let secs = tokens[2]
        .strip_prefix('t')
        .ok_or_else(|| malformed(name, "timestamp token must start with 't'"))?;
    let timestamp_sec = parse_digits(name, "timestamp", secs)?;
    let frame = tokens[3]
        .strip_prefix("frame")
        .ok_or_else(|| malformed(name, "frame token must start with 'frame'"))?;
    let frame_number = parse_digits(name, "frame number", frame)?;
    let bbox_index = parse_digits(name, "bbox index", tokens[4])?;

    Ok(ImageRecord {
        person_id,
        camera,
        timestamp_sec,
        frame_number,
        bbox_index,
        feature: None,
    })
}

/// Inverse of [`parse_image_filename`]; always emits a `.jpg` extension.
pub fn format_image_filename(rec: &ImageRecord, frame_width: usize) -> Result<String, DatasetError> {
    let frame = rec.frame_number.to_string();
    if frame.len() > frame_width {
        return Err(DatasetError::FrameWidthOverflow {
            frame_number: rec.frame_number,
            width: frame_width,
        });
    }
    Ok(format!(
        "{}_{}_t{}_frame{:0>width$}_{}.jpg",
        rec.person_id,
        rec.camera,
        rec.timestamp_sec,
        frame,
        rec.bbox_index,
        width = frame_width
    ))
}
