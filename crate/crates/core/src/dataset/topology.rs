use std::path::Path;

use super::{CameraId, DatasetError};

/// Symmetric walking-distance matrix (meters) over a set of cameras.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraTopology {
    camera_ids: Vec<CameraId>,
    distances_m: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-9;

impl CameraTopology {
    /// `distances_m` is row-major, `n x n` for `n` cameras.
    pub fn new(camera_ids: Vec<CameraId>, distances_m: Vec<f64>) -> Result<Self, DatasetError> {
        let n = camera_ids.len();
        let invalid = |m: String| DatasetError::InvalidTopology(m);
        if n == 0 {
            return Err(invalid("no cameras".into()));
        }
        if distances_m.len() != n * n {
            return Err(invalid(format!("expected {n}x{n} matrix, got {} cells", distances_m.len())));
        }
        for (i, a) in camera_ids.iter().enumerate() {
            if camera_ids[..i].contains(a) {
                return Err(invalid(format!("camera {a} listed twice")));
            }
        }
        for i in 0..n {
            if distances_m[i * n + i] != 0.0 {
                return Err(invalid(format!("non-zero diagonal at {}", camera_ids[i])));
            }
            for j in 0..n {
                let d = distances_m[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(invalid(format!("bad distance {d} at ({i},{j})")));
                }
                if (d - distances_m[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(invalid(format!(
                        "asymmetric distance between {} and {}",
                        camera_ids[i], camera_ids[j]
                    )));
                }
            }
        }
        Ok(CameraTopology {
            camera_ids,
            distances_m,
        })
    }

    /// Walking distances of the five-camera airport network (C900 query
    /// camera, C902/C903/C904/C926 gallery cameras).
    ///
    /// The published table lists C904-C926 as 63.5 m in one direction and
    /// 57.0 m in the other; the upper-triangle value is used for both.
    pub fn airport() -> Self {
        let ids = ["c0900", "c0902", "c0903", "c0904", "c0926"]
            .iter()
            .map(|c| CameraId::parse(c).expect("static id"))
            .collect();
        #[rustfmt::skip]
        let d = vec![
            0.0,   48.5,  106.0, 70.0, 68.0,
            48.5,  0.0,   59.0,  19.0, 38.5,
            106.0, 59.0,  0.0,   45.0, 97.5,
            70.0,  19.0,  45.0,  0.0,  63.5,
            68.0,  38.5,  97.5,  63.5, 0.0,
        ];
        CameraTopology::new(ids, d).expect("static topology is valid")
    }

    pub fn camera_ids(&self) -> &[CameraId] {
        &self.camera_ids
    }

    pub fn len(&self) -> usize {
        self.camera_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.camera_ids.is_empty()
    }

    /// Exact token match first; otherwise the unique camera with the same
    /// numeric value (so `C900` finds `c0900`).
    pub fn index_of(&self, cam: &CameraId) -> Option<usize> {
        if let Some(i) = self.camera_ids.iter().position(|c| c == cam) {
            return Some(i);
        }
        let num = cam.number()?;
        let mut hits = self
            .camera_ids
            .iter()
            .enumerate()
            .filter(|(_, c)| c.number() == Some(num));
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    pub fn walking_distance(&self, a: &CameraId, b: &CameraId) -> Result<f64, DatasetError> {
        let n = self.len();
        let i = self
            .index_of(a)
            .ok_or_else(|| DatasetError::UnknownCamera(a.to_string()))?;
        let j = self
            .index_of(b)
            .ok_or_else(|| DatasetError::UnknownCamera(b.to_string()))?;
        Ok(self.distances_m[i * n + j])
    }

    /// CSV with camera IDs along the first row and first column.
    pub fn from_csv_str(text: &str) -> Result<Self, DatasetError> {
        let invalid = |m: String| DatasetError::InvalidTopology(m);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = reader.records();
        let header = rows
            .next()
            .ok_or_else(|| invalid("empty file".into()))?
            .map_err(|e| invalid(e.to_string()))?;
        let ids = header
            .iter()
            .skip(1)
            .map(CameraId::parse)
            .collect::<Result<Vec<_>, _>>()?;
        let mut distances = vec![f64::NAN; ids.len() * ids.len()];
        let mut seen_rows = 0;
        for row in rows {
            let row = row.map_err(|e| invalid(e.to_string()))?;
            if row.iter().all(str::is_empty) {
                continue;
            }
            let cam = CameraId::parse(row.get(0).unwrap_or(""))?;
            let i = ids
                .iter()
                .position(|c| *c == cam)
                .ok_or_else(|| invalid(format!("row camera {cam} missing from header")))?;
            if row.len() != ids.len() + 1 {
                return Err(invalid(format!("row {cam} has {} cells", row.len() - 1)));
            }
            for (j, cell) in row.iter().skip(1).enumerate() {
                distances[i * ids.len() + j] = cell
                    .parse()
                    .map_err(|_| invalid(format!("bad distance {cell:?} in row {cam}")))?;
            }
            seen_rows += 1;
        }
        if seen_rows != ids.len() {
            return Err(invalid(format!("expected {} rows, found {seen_rows}", ids.len())));
        }
        CameraTopology::new(ids, distances)
    }

    pub fn read_csv(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn to_csv(&self) -> String {
        let n = self.len();
        let mut out = String::from("camera");
        for c in &self.camera_ids {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for (i, c) in self.camera_ids.iter().enumerate() {
            out.push_str(c.as_str());
            for j in 0..n {
                out.push(',');
                out.push_str(&self.distances_m[i * n + j].to_string());
            }
            out.push('\n');
        }
        out
    }
}
