//! Graded device mesh with the interface edges as forced nodes.

use crate::materials::{region_of, Region};
use crate::scaling::ScaledParams;
use thiserror::Error;

/// One-dimensional mesh over `[x0, x_end]`.
///
/// The interface strip `[x_l, x_r]` is meshed symmetrically about `x_m` with
/// cells refined toward the strip edges; the bulk zones continue that
/// refinement with a geometric fan that relaxes to a uniform interior.  The
/// strip edges and midpoint are nodes, exactly.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Node positions, strictly increasing; first is `x0`, last `x_end`.
    pub nodes: Vec<f64>,
    /// Cell widths, `widths[j] = nodes[j+1] - nodes[j]`.
    pub widths: Vec<f64>,
    /// Control-volume size per node (half-cell at the ends).
    pub volumes: Vec<f64>,
    /// Region of each node; the strip edges classify as interface.
    pub node_region: Vec<Region>,
    /// Whether the midpoint of cell `j` lies inside the open strip.
    pub cell_in_interface: Vec<bool>,
    /// Index of the node at `x_l`.
    pub i_xl: usize,
    /// Index of the node at `x_m`.
    pub i_xm: usize,
    /// Index of the node at `x_r`.
    pub i_xr: usize,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|probe| probe.total_cmp(&x))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if (self.nodes[i] - x).abs() < (x - self.nodes[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        }
    }

    /// Number of cells whose midpoint lies inside the interface strip.
    pub fn interface_cell_count(&self) -> usize {
        self.cell_in_interface.iter().filter(|&&b| b).count()
    }
}

/// Rejected mesh request.
#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("n_cells must be at least 100, got {0}")]
    TooFewCells(usize),
    #[error("grading ratio must lie in [1, 2], got {0}")]
    BadGrading(f64),
}

/// Geometric widths over one strip half: `m` cells with consecutive ratio
/// `r`, finest adjacent to the `fine_at_start` end, normalized to `span`.
fn graded_widths(span: f64, m: usize, r: f64, fine_at_start: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|k| r.powi(k as i32)).collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v *= span / sum;
    }
    if !fine_at_start {
        w.reverse();
    }
    w
}

/// Bulk widths: a fan that starts at `w0` next to the interface and grows by
/// `r` until it reaches the uniform target, then uniform fill; rescaled so
/// the widths sum to `span` exactly.  Finest cell first.
fn bulk_widths(span: f64, n: usize, w0: f64, r: f64) -> Vec<f64> {
    let target = span / n as f64;
    let mut widths = Vec::with_capacity(n);
    let mut w = w0;
    while widths.len() < n && w < target {
        widths.push(w);
        w *= r;
    }
    while widths.len() < n {
        widths.push(target);
    }
    let sum: f64 = widths.iter().sum();
    for v in &mut widths {
        *v *= span / sum;
    }
    widths
}

/// Builds the graded mesh.
///
/// `grading` is the consecutive-cell ratio of the refinement, accepted in
/// `[1, 2]`; the value 1 degenerates to piecewise-uniform zones.  Each strip
/// half receives `max(20, n_cells/100)` cells, so the interface always
/// carries at least 40 cells and the finest cells sit at `x_l` and `x_r`.
pub fn build_mesh(p: &ScaledParams, n_cells: usize, grading: f64) -> Result<Mesh, MeshError> {
    if n_cells < 100 {
        return Err(MeshError::TooFewCells(n_cells));
    }
    if !(1.0..=2.0).contains(&grading) || !grading.is_finite() {
        return Err(MeshError::BadGrading(grading));
    }
    let m = (n_cells / 100).max(20);
    let wl = graded_widths(p.x_m - p.x_l, m, grading, true);
    let wr = graded_widths(p.x_r - p.x_m, m, grading, false);
    let wmin = wl[0].min(*wr.last().unwrap());

    let rest = n_cells - 2 * m;
    let span_l = p.x_l - p.x0;
    let span_r = p.x_end - p.x_r;
    let n_left = ((rest as f64 * span_l / (span_l + span_r)).round() as usize).max(2);
    let n_right = (rest - n_left).max(2);
    let mut bl = bulk_widths(span_l, n_left, wmin, grading);
    bl.reverse(); // fan grows leftward away from x_l
    let br = bulk_widths(span_r, n_right, wmin, grading);

    let mut widths = Vec::with_capacity(n_left + 2 * m + n_right);
    widths.extend_from_slice(&bl);
    widths.extend_from_slice(&wl);
    widths.extend_from_slice(&wr);
    widths.extend_from_slice(&br);

    let mut nodes = Vec::with_capacity(widths.len() + 1);
    nodes.push(p.x0);
    let mut acc = p.x0;
    for w in &widths {
        acc += w;
        nodes.push(acc);
    }
    // Snap the forced nodes exactly; accumulated round-off is far below the
    // neighboring cell widths.
    let i_xl = n_left;
    let i_xm = n_left + m;
    let i_xr = n_left + 2 * m;
    nodes[i_xl] = p.x_l;
    nodes[i_xm] = p.x_m;
    nodes[i_xr] = p.x_r;
    *nodes.last_mut().unwrap() = p.x_end;
    for (j, w) in widths.iter_mut().enumerate() {
        *w = nodes[j + 1] - nodes[j];
        assert!(*w > 0.0, "mesh construction produced a non-positive cell");
    }

    let n = nodes.len();
    let mut volumes = vec![0.0; n];
    volumes[0] = 0.5 * widths[0];
    volumes[n - 1] = 0.5 * widths[n - 2];
    for i in 1..n - 1 {
        volumes[i] = 0.5 * (widths[i - 1] + widths[i]);
    }
    let node_region = nodes.iter().map(|&x| region_of(x, p)).collect();
    let cell_in_interface = (0..n - 1)
        .map(|j| {
            let mid = 0.5 * (nodes[j] + nodes[j + 1]);
            mid > p.x_l && mid < p.x_r
        })
        .collect();

    Ok(Mesh {
        nodes,
        widths,
        volumes,
        node_region,
        cell_in_interface,
        i_xl,
        i_xm,
        i_xr,
    })
}
