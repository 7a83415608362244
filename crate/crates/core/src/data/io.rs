use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::data::SequenceRecord;
use crate::error::{Error, Result};
use crate::model::SkeletonSpec;
use crate::numerics::Tensor;

/// Sequence CSV header (bit-exact contract).
pub const CSV_HEADER: &str = "seq_id,action,couple,fps,frame,body,joint,x,y,z";

#[derive(Debug, Deserialize)]
struct Row {
    seq_id: String,
    action: String,
    couple: u32,
    fps: f64,
    frame: usize,
    body: usize,
    joint: usize,
    x: f64,
    y: f64,
    z: f64,
}

/// Load all sequences from a CSV file, validated against the skeleton.
pub fn load_sequences(path: impl AsRef<Path>, skeleton: &SkeletonSpec) -> Result<Vec<SequenceRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_sequences_from_reader(file, skeleton)
}

/// Load sequences from any reader carrying the CSV schema.
pub fn load_sequences_from_reader(
    reader: impl Read,
    skeleton: &SkeletonSpec,
) -> Result<Vec<SequenceRecord>> {
    let j = skeleton.joints_per_body();
    let nodes = skeleton.node_count();
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);

    // rows per sequence, in order of first appearance
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<Row>> = HashMap::new();
    for (line, record) in csv_reader.deserialize::<Row>().enumerate() {
        let row = record.map_err(|e| Error::Ingestion {
            message: format!("csv row {}: {e}", line + 2),
        })?;
        if row.body >= skeleton.bodies {
            return Err(Error::Ingestion {
                message: format!(
                    "sequence {} frame {}: body {} out of range ({} bodies)",
                    row.seq_id, row.frame, row.body, skeleton.bodies
                ),
            });
        }
        if row.joint >= j {
            return Err(Error::Ingestion {
                message: format!(
                    "sequence {} frame {}: joint {} out of range ({j} joints)",
                    row.seq_id, row.frame, row.joint
                ),
            });
        }
        if !(row.x.is_finite() && row.y.is_finite() && row.z.is_finite()) {
            return Err(Error::Ingestion {
                message: format!(
                    "sequence {} frame {}: non-finite coordinate",
                    row.seq_id, row.frame
                ),
            });
        }
        if !rows.contains_key(&row.seq_id) {
            order.push(row.seq_id.clone());
        }
        rows.entry(row.seq_id.clone()).or_default().push(row);
    }

    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let seq_rows = rows.remove(&id).expect("collected above");
        out.push(build_record(&id, seq_rows, j, nodes)?);
    }
    Ok(out)
}

fn build_record(id: &str, seq_rows: Vec<Row>, j: usize, nodes: usize) -> Result<SequenceRecord> {
    let action = seq_rows[0].action.clone();
    let couple = seq_rows[0].couple;
    let fps = seq_rows[0].fps;
    if !(fps > 0.0) {
        return Err(Error::Ingestion {
            message: format!("sequence {id}: fps must be positive, got {fps}"),
        });
    }
    if seq_rows.len() % nodes != 0 {
        return Err(Error::Ingestion {
            message: format!(
                "sequence {id}: {} rows is not a multiple of {nodes} nodes",
                seq_rows.len()
            ),
        });
    }
    let frame_count = seq_rows.len() / nodes;
    let mut values = vec![f64::NAN; frame_count * nodes * 3];
    let mut seen = vec![false; frame_count * nodes];
    let mut last_frame: Option<usize> = None;
    for row in &seq_rows {
        if row.action != action || row.couple != couple || row.fps != fps {
            return Err(Error::Ingestion {
                message: format!("sequence {id}: inconsistent action/couple/fps across rows"),
            });
        }
        if let Some(prev) = last_frame {
            if row.frame < prev {
                return Err(Error::Ingestion {
                    message: format!(
                        "sequence {id}: non-monotone frame index {} after {prev}",
                        row.frame
                    ),
                });
            }
        }
        last_frame = Some(row.frame);
        if row.frame >= frame_count {
            return Err(Error::Ingestion {
                message: format!(
                    "sequence {id}: frame index {} out of the dense range 0..{frame_count}",
                    row.frame
                ),
            });
        }
        let node = row.body * j + row.joint;
        let cell = row.frame * nodes + node;
        if seen[cell] {
            return Err(Error::Ingestion {
                message: format!(
                    "sequence {id} frame {}: duplicate body {} joint {}",
                    row.frame, row.body, row.joint
                ),
            });
        }
        seen[cell] = true;
        values[cell * 3] = row.x;
        values[cell * 3 + 1] = row.y;
        values[cell * 3 + 2] = row.z;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        let frame = missing / nodes;
        let node = missing % nodes;
        return Err(Error::Ingestion {
            message: format!(
                "sequence {id} frame {frame}: missing body {} joint {}",
                node / j,
                node % j
            ),
        });
    }
    let record = SequenceRecord {
        id: id.to_string(),
        action,
        couple,
        fps,
        frames: Tensor::new(vec![frame_count, nodes, 3], values)?,
    };
    record.validate()?;
    Ok(record)
}

/// Serialize sequences to the CSV schema (coordinates at 6 decimal places).
pub fn write_sequences_to_string(seqs: &[SequenceRecord], skeleton: &SkeletonSpec) -> String {
    let j = skeleton.joints_per_body();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for seq in seqs {
        let nodes = seq.node_count();
        for frame in 0..seq.frame_count() {
            for node in 0..nodes {
                let (body, joint) = (node / j, node % j);
                let x = seq.frames.at(&[frame, node, 0]);
                let y = seq.frames.at(&[frame, node, 1]);
                let z = seq.frames.at(&[frame, node, 2]);
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{:.6},{:.6},{:.6}\n",
                    seq.id, seq.action, seq.couple, seq.fps, frame, body, joint, x, y, z
                ));
            }
        }
    }
    out
}

pub fn write_sequences(
    path: impl AsRef<Path>,
    seqs: &[SequenceRecord],
    skeleton: &SkeletonSpec,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_sequences_to_string(seqs, skeleton))
        .map_err(|e| Error::io(path.display().to_string(), e))
}
