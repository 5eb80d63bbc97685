//! Periodic lattices on the box `B = [-1,1)^n` and distances to the
//! degeneration set.
//!
//! The 1D lattice places `2m` nodes `x_i = i/m` for `i = -m..m-1` with
//! spacing `d_m = 1/m`; the node `x_m = 1` is identified with `x_{-m} = -1`
//! and stored once. All index arithmetic wraps modulo `2m`.

use crate::Error;

/// Uniform periodic lattice on `[-1, 1)`.
#[derive(Clone, Debug)]
pub struct Grid1D {
    m: usize,
    d_m: f64,
    nodes: Vec<f64>,
}

impl Grid1D {
    /// Build the `2m`-node lattice `x_i = i/m`, `i = -m..m-1`.
    pub fn new(m: usize) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                what: "grid half node count m",
                why: "must be at least 1".into(),
            });
        }
        let mf = m as f64;
        let nodes = (0..2 * m).map(|j| (j as f64 - mf) / mf).collect();
        Ok(Self {
            m,
            d_m: 1.0 / mf,
            nodes,
        })
    }

    /// Half node count `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Node spacing `d_m = 1/m`.
    pub fn spacing(&self) -> f64 {
        self.d_m
    }

    /// Total number of nodes `2m`.
    pub fn len(&self) -> usize {
        2 * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes in storage order, i.e. `x_{-m}, ..., x_{m-1}`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node coordinate at storage index `j` (signed index `i = j - m`).
    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// Storage index of the signed lattice index `i`, wrapped modulo `2m`.
    pub fn storage_index(&self, i: isize) -> usize {
        let n = 2 * self.m as isize;
        (((i + self.m as isize) % n + n) % n) as usize
    }

    /// Grids are interchangeable iff they have the same node count.
    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.m == other.m
    }
}

/// Square periodic lattice on `[-1,1)^2`, the tensor product of two 1D
/// node sets with common spacing `1/m`.
#[derive(Clone, Debug)]
pub struct Grid2D {
    m: usize,
    spacing: f64,
    axis_nodes: Vec<f64>,
}

impl Grid2D {
    pub fn new(m: usize) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                what: "grid half node count m",
                why: "must be at least 1".into(),
            });
        }
        let mf = m as f64;
        let axis_nodes = (0..2 * m).map(|j| (j as f64 - mf) / mf).collect();
        Ok(Self {
            m,
            spacing: 1.0 / mf,
            axis_nodes,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Nodes per axis, `2m`.
    pub fn axis_len(&self) -> usize {
        2 * self.m
    }

    /// Node coordinates shared by both axes.
    pub fn axis_nodes(&self) -> &[f64] {
        &self.axis_nodes
    }

    /// Coordinates of the lattice point with storage indices `(ix, iy)`.
    pub fn node(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.axis_nodes[ix], self.axis_nodes[iy])
    }
}

/// The degeneration set: the points `{-1/2, 1/2}` on the circle, or a
/// circle strictly inside the square box.
#[derive(Clone, Debug, PartialEq)]
pub enum GammaSet {
    /// `{-1/2, 1/2}` on the 1D torus.
    OneD,
    /// Circle of given center and radius, strictly inside `[-1,1)^2`.
    Circle { center: (f64, f64), radius: f64 },
}

impl GammaSet {
    /// Circle centered at the origin with radius `1/2`, mirroring the 1D
    /// geometry where the inner region is `[-1/2, 1/2]`.
    pub fn default_circle() -> Self {
        GammaSet::Circle {
            center: (0.0, 0.0),
            radius: 0.5,
        }
    }

    /// A circle that fits strictly inside the box.
    pub fn circle(center: (f64, f64), radius: f64) -> Result<Self, Error> {
        let fits = radius > 0.0 && center.0.abs() + radius < 1.0 && center.1.abs() + radius < 1.0;
        if !fits {
            return Err(Error::InvalidParameter {
                what: "circle degeneration set",
                why: format!(
                    "circle (center ({}, {}), radius {}) must lie strictly inside [-1,1)^2",
                    center.0, center.1, radius
                ),
            });
        }
        Ok(GammaSet::Circle { center, radius })
    }

    /// Torus distance from a 1D point to the degeneration set.
    ///
    /// Panics when called on a circle variant; circles live on the square.
    pub fn distance_1d(&self, x: f64) -> f64 {
        match self {
            GammaSet::OneD => {
                let a = torus_wrap(x - 0.5).abs();
                let b = torus_wrap(x + 0.5).abs();
                a.min(b)
            }
            GammaSet::Circle { .. } => {
                panic!("distance_1d is only defined for the 1D degeneration set")
            }
        }
    }

    /// Torus distance from a 2D point to the degeneration set.
    pub fn distance_2d(&self, p: (f64, f64)) -> f64 {
        match self {
            GammaSet::Circle { center, radius } => {
                let dx = torus_wrap(p.0 - center.0);
                let dy = torus_wrap(p.1 - center.1);
                ((dx * dx + dy * dy).sqrt() - radius).abs()
            }
            GammaSet::OneD => panic!("distance_2d is only defined for the circle variant"),
        }
    }
}

/// Wrap a displacement into the fundamental period `[-1, 1)`.
pub fn torus_wrap(t: f64) -> f64 {
    (t + 1.0).rem_euclid(2.0) - 1.0
}

/// Torus distance between two 1D points (half-period at most, i.e. `<= 1`).
pub fn torus_distance(a: f64, b: f64) -> f64 {
    torus_wrap(a - b).abs()
}
