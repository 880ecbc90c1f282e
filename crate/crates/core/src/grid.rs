//! Nodes on `[-m, l]` with a mandatory node at the interface `x3 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    nodes: Vec<f64>,
    interface_index: usize,
}

impl Grid1D {
    /// Uniform spacing on each side.
    pub fn uniform(depth: f64, height: f64, n_lower: usize, n_upper: usize) -> Result<Self> {
        Self::graded(depth, height, n_lower, n_upper, 0.0)
    }

    /// Cells clustered toward the interface. `stretch = 0` is uniform; the
    /// map is `t -> (e^(stretch t) - 1) / (e^stretch - 1)` on each side.
    pub fn graded(
        depth: f64,
        height: f64,
        n_lower: usize,
        n_upper: usize,
        stretch: f64,
    ) -> Result<Self> {
        if !(depth > 0.0 && height > 0.0 && depth.is_finite() && height.is_finite()) {
            return Err(Error::InvalidGrid("depth and height must be positive".into()));
        }
        if n_lower == 0 || n_upper == 0 {
            return Err(Error::InvalidGrid("each side needs at least one element".into()));
        }
        if !(stretch >= 0.0 && stretch.is_finite()) {
            return Err(Error::InvalidGrid("stretch must be nonnegative".into()));
        }
        let map = |t: f64| {
            if stretch == 0.0 {
                t
            } else {
                (stretch * t).exp_m1() / stretch.exp_m1()
            }
        };
        let mut nodes = Vec::with_capacity(n_lower + n_upper + 1);
        nodes.push(-depth);
        for i in (1..n_lower).rev() {
            nodes.push(-depth * map(i as f64 / n_lower as f64));
        }
        nodes.push(0.0);
        for i in 1..n_upper {
            nodes.push(height * map(i as f64 / n_upper as f64));
        }
        nodes.push(height);
        Self::from_nodes(nodes)
    }

    /// Graded grid whose interface cells have width about `first_width`.
    pub fn with_interface_width(
        depth: f64,
        height: f64,
        n_per_side: usize,
        first_width: f64,
    ) -> Result<Self> {
        let span = depth.min(height);
        let uniform_width = span / n_per_side as f64;
        if first_width >= uniform_width {
            return Self::uniform(depth, height, n_per_side, n_per_side);
        }
        let t = 1.0 / n_per_side as f64;
        let width = |b: f64| span * (b * t).exp_m1() / b.exp_m1();
        let (mut lo, mut hi) = (1e-12, 1.0);
        while width(hi) > first_width {
            hi *= 2.0;
            if hi > 700.0 {
                return Err(Error::InvalidGrid(format!(
                    "cannot reach interface width {first_width} with {n_per_side} cells"
                )));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if width(mid) > first_width {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::graded(depth, height, n_per_side, n_per_side, 0.5 * (lo + hi))
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid("need at least three nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        let interface_index = nodes
            .iter()
            .position(|&x| x == 0.0)
            .ok_or_else(|| Error::InvalidGrid("no node at x3 = 0".into()))?;
        if interface_index == 0 || interface_index == nodes.len() - 1 {
            return Err(Error::InvalidGrid("interface must be interior".into()));
        }
        Ok(Self {
            nodes,
            interface_index,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn interface_index(&self) -> usize {
        self.interface_index
    }

    pub fn depth(&self) -> f64 {
        -self.nodes[0]
    }

    pub fn height(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn width(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.width(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_width(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.width(e)).fold(0.0, f64::max)
    }

    /// Elements below the interface come first.
    pub fn element_is_upper(&self, e: usize) -> bool {
        e >= self.interface_index
    }
}
