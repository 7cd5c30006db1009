//! On-disk formats.  JSON for sets, shapes, and reports; a flat CSV writer
//! for sweep tables.  Voxel grids are run-length encoded over the linear
//! cell index so 3d fixtures stay readable.
//!
//! Serialization is deterministic: struct fields keep declaration order and
//! floats print shortest-roundtrip, so identical values give identical bytes.

use crate::anisotropy::WulffShape;
use crate::error::{Error, Result};
use crate::geom::v2;
use crate::geomset::{GeomSet, PolygonSystem, VoxelGrid};
use crate::johnmetric::JohnEstimate;
use crate::whitney::WhitneyDecomposition;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetFile {
    Polygon {
        loops: Vec<Vec<[f64; 2]>>,
    },
    Voxels {
        dim: usize,
        h: f64,
        origin: [f64; 3],
        dims: [usize; 3],
        /// [start, len] runs of occupied cells, linear index x + dims.x (y + dims.y z).
        runs: Vec<[u64; 2]>,
    },
}

pub fn encode_set(set: &GeomSet) -> SetFile {
    match set {
        GeomSet::Polygon(sys) => SetFile::Polygon {
            loops: sys
                .loops()
                .iter()
                .map(|lp| lp.iter().map(|p| [p.x, p.y]).collect())
                .collect(),
        },
        GeomSet::Voxels(g) => {
            let mut runs: Vec<[u64; 2]> = Vec::new();
            let mut lin = 0u64;
            for z in 0..g.dims[2] {
                for y in 0..g.dims[1] {
                    for x in 0..g.dims[0] {
                        if g.get(x, y, z) {
                            match runs.last_mut() {
                                Some(r) if r[0] + r[1] == lin => r[1] += 1,
                                _ => runs.push([lin, 1]),
                            }
                        }
                        lin += 1;
                    }
                }
            }
            SetFile::Voxels { dim: g.dim, h: g.h, origin: g.origin, dims: g.dims, runs }
        }
    }
}

pub fn decode_set(file: &SetFile) -> Result<GeomSet> {
    match file {
        SetFile::Polygon { loops } => {
            let loops = loops
                .iter()
                .map(|lp| lp.iter().map(|p| v2(p[0], p[1])).collect())
                .collect();
            Ok(GeomSet::Polygon(PolygonSystem::new(loops)?))
        }
        SetFile::Voxels { dim, h, origin, dims, runs } => {
            let mut g = VoxelGrid::empty(*dim, *h, *origin, *dims)?;
            let total = (dims[0] * dims[1] * dims[2]) as u64;
            for r in runs {
                let (start, len) = (r[0], r[1]);
                if start + len > total {
                    return Err(Error::BadInput(format!(
                        "voxel run {start}+{len} past the grid ({total} cells)"
                    )));
                }
                for lin in start..start + len {
                    let x = (lin as usize) % dims[0];
                    let y = (lin as usize) / dims[0] % dims[1];
                    let z = (lin as usize) / (dims[0] * dims[1]);
                    g.set(x, y, z, true);
                }
            }
            Ok(GeomSet::Voxels(g))
        }
    }
}

/// Wulff body on disk: boundary vertices, volume kept as a readable checksum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeFile {
    pub verts: Vec<[f64; 2]>,
    pub volume: f64,
}

pub fn encode_shape(k: &WulffShape) -> Result<ShapeFile> {
    let verts = k
        .polygon()
        .ok_or_else(|| Error::BadInput("only planar bodies have a file form".into()))?;
    Ok(ShapeFile { verts: verts.iter().map(|p| [p.x, p.y]).collect(), volume: k.volume })
}

pub fn decode_shape(file: &ShapeFile) -> Result<WulffShape> {
    WulffShape::from_polygon(file.verts.iter().map(|p| v2(p[0], p[1])).collect())
}

/// Decomposition dump with the domain it came from, enough to re-render.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyFile {
    pub domain: SetFile,
    pub decomposition: WhitneyDecomposition,
}

/// John estimate with the domain and the worst witness curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JohnFile {
    pub domain: SetFile,
    pub estimate: JohnEstimate,
}

/// Selection run: the input, the recentred rescaled minimizer, the body,
/// and every certificate the solver produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectFile {
    pub input: SetFile,
    pub body: ShapeFile,
    pub minimizer: SetFile,
    pub lambda_k: f64,
    pub energies: crate::selection::SelectionEnergies,
    pub checks: crate::selection::SelectionChecks,
    pub converged: bool,
    pub fell_back: bool,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, json_string(value))
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline; the byte-for-byte output contract
/// leans on this being the only JSON printer.
pub fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn read_set(path: &Path) -> Result<GeomSet> {
    decode_set(&read_json(path)?)
}

pub fn write_set(path: &Path, set: &GeomSet) -> Result<()> {
    write_json(path, &encode_set(set))
}

/// CSV with a header row; floats print shortest-roundtrip.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, csv_string(header, rows))
        .map_err(|e| Error::BadInput(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn polygon_sets_round_trip_exactly() {
        let set = fixtures::lshape();
        let back = decode_set(&encode_set(&set)).unwrap();
        let (GeomSet::Polygon(a), GeomSet::Polygon(b)) = (&set, &back) else { unreachable!() };
        assert_eq!(a.loops(), b.loops());
    }

    #[test]
    fn voxel_sets_round_trip_through_the_run_encoding() {
        let mut g = VoxelGrid::empty(3, 0.5, [0.0, 0.0, 0.0], [5, 4, 3]).unwrap();
        for (x, y, z) in [(0, 0, 0), (1, 0, 0), (4, 3, 2), (2, 2, 1), (3, 2, 1)] {
            g.set(x, y, z, true);
        }
        let set = GeomSet::Voxels(g);
        let back = decode_set(&encode_set(&set)).unwrap();
        let (GeomSet::Voxels(a), GeomSet::Voxels(b)) = (&set, &back) else { unreachable!() };
        assert_eq!(a.cell_count(), b.cell_count());
        for z in 0..3 {
            for y in 0..4 {
                for x in 0..5 {
                    assert_eq!(a.get(x, y, z), b.get(x, y, z));
                }
            }
        }
    }

    #[test]
    fn out_of_range_runs_are_refused() {
        let file = SetFile::Voxels {
            dim: 2,
            h: 1.0,
            origin: [0.0; 3],
            dims: [2, 2, 1],
            runs: vec![[3, 2]],
        };
        assert!(matches!(decode_set(&file), Err(Error::BadInput(_))));
    }

    #[test]
    fn json_bytes_are_stable() {
        let set = fixtures::disc();
        assert_eq!(json_string(&encode_set(&set)), json_string(&encode_set(&set)));
    }
}
