//! Versioned on-disk cache for characteristic-vector graphs, keyed by the
//! canonical hash of the generating geometry. A corrupted or stale file is
//! detected by checksum/version/hash mismatch and simply ignored.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::hex_string;
use crate::field::{parse_rational, FieldError, FieldScalar, NumberField};
use crate::netgraph::{CvGraph, CvNode, GraphEdge, RatMatrix, ReducedCv};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphCacheFile {
    pub format_version: u32,
    pub tool_version: String,
    pub graph_hash: String,
    pub checksum: String,
    pub payload: GraphRepr,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphRepr {
    nodes: Vec<NodeRepr>,
    edges: Vec<Vec<Vec<EdgeRepr>>>,
    ratio: Vec<String>,
    letters: usize,
    cap: usize,
    has_gap_class: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRepr {
    length: Vec<String>,
    neighbours: Vec<Vec<String>>,
    level: u32,
    parent: Option<(usize, u8, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRepr {
    child: usize,
    ordinal: u32,
    rows: usize,
    cols: usize,
    data: Vec<String>,
    span: (Vec<String>, Vec<String>),
}

fn scalar_repr(x: &FieldScalar) -> Vec<String> {
    x.coeffs().iter().map(crate::field::format_rational).collect()
}

fn scalar_from(repr: &[String], field: &Arc<NumberField>) -> Result<FieldScalar, FieldError> {
    let coeffs = repr.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>, _>>()?;
    Ok(field.scalar(coeffs))
}

impl GraphRepr {
    pub fn from_graph(graph: &CvGraph) -> Self {
        GraphRepr {
            nodes: graph
                .nodes
                .iter()
                .map(|n| NodeRepr {
                    length: scalar_repr(&n.cv.length),
                    neighbours: n.cv.neighbours.iter().map(scalar_repr).collect(),
                    level: n.level,
                    parent: n.parent,
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|per_node| {
                    per_node
                        .iter()
                        .map(|kids| {
                            kids.iter()
                                .map(|e| EdgeRepr {
                                    child: e.child,
                                    ordinal: e.ordinal,
                                    rows: e.matrix.rows,
                                    cols: e.matrix.cols,
                                    data: e
                                        .matrix
                                        .data
                                        .iter()
                                        .map(crate::field::format_rational)
                                        .collect(),
                                    span: (scalar_repr(&e.span.0), scalar_repr(&e.span.1)),
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            ratio: scalar_repr(&graph.ratio),
            letters: graph.letters,
            cap: graph.cap,
            has_gap_class: graph.has_gap_class,
        }
    }

    pub fn into_graph(&self, field: &Arc<NumberField>) -> Result<CvGraph, FieldError> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(CvNode {
                    cv: ReducedCv {
                        length: scalar_from(&n.length, field)?,
                        neighbours: n
                            .neighbours
                            .iter()
                            .map(|nb| scalar_from(nb, field))
                            .collect::<Result<Vec<_>, _>>()?,
                    },
                    level: n.level,
                    parent: n.parent,
                })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        let edges = self
            .edges
            .iter()
            .map(|per_node| {
                per_node
                    .iter()
                    .map(|kids| {
                        kids.iter()
                            .map(|e| {
                                Ok(GraphEdge {
                                    child: e.child,
                                    ordinal: e.ordinal,
                                    matrix: RatMatrix {
                                        rows: e.rows,
                                        cols: e.cols,
                                        data: e
                                            .data
                                            .iter()
                                            .map(|q| parse_rational(q))
                                            .collect::<Result<Vec<_>, _>>()?,
                                    },
                                    span: (
                                        scalar_from(&e.span.0, field)?,
                                        scalar_from(&e.span.1, field)?,
                                    ),
                                })
                            })
                            .collect::<Result<Vec<_>, FieldError>>()
                    })
                    .collect::<Result<Vec<_>, FieldError>>()
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(CvGraph {
            nodes,
            edges,
            ratio: scalar_from(&self.ratio, field)?,
            letters: self.letters,
            cap: self.cap,
            has_gap_class: self.has_gap_class,
        })
    }
}

pub fn cache_path(dir: &Path, graph_hash: &str) -> PathBuf {
    dir.join(format!("graph-{graph_hash}.json"))
}

/// Write the graph cache file (atomically via a temp name).
pub fn save_graph(dir: &Path, graph_hash: &str, graph: &CvGraph) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let payload = GraphRepr::from_graph(graph);
    let payload_json = serde_json::to_string(&payload).expect("serializable payload");
    let checksum = hex_string(&Sha256::digest(payload_json.as_bytes()));
    let file = GraphCacheFile {
        format_version: FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        graph_hash: graph_hash.to_string(),
        checksum,
        payload,
    };
    let path = cache_path(dir, graph_hash);
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_string(&file).expect("serializable cache"))?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Load a cached graph; `None` when missing, stale, corrupted or for a
/// different geometry.
pub fn load_graph(dir: &Path, graph_hash: &str, field: &Arc<NumberField>) -> Option<CvGraph> {
    let path = cache_path(dir, graph_hash);
    let text = std::fs::read_to_string(path).ok()?;
    let file: GraphCacheFile = serde_json::from_str(&text).ok()?;
    if file.format_version != FORMAT_VERSION || file.graph_hash != graph_hash {
        return None;
    }
    let payload_json = serde_json::to_string(&file.payload).ok()?;
    if hex_string(&Sha256::digest(payload_json.as_bytes())) != file.checksum {
        return None;
    }
    file.payload.into_graph(field).ok()
}
