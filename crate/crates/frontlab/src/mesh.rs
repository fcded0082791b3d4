//! Graded one-dimensional meshes and quadrature on them.
//!
//! Front profiles have an O(1) interior layer at ξ = 0 and exponential tails
//! whose decay rates differ by orders of magnitude between the two ends, so
//! meshes are built from a uniform core plus geometrically stretched tails.
//! Refinement keeps the grading smooth (constant local stretch ratio), which
//! the second-order nonuniform stencils of the stability operator rely on.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mesh {
    pub x: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Core cell size around ξ = 0.
    pub h_core: f64,
    /// Half-width of the uniform core.
    pub w_core: f64,
    /// Geometric stretch ratio outside the core (> 1).
    pub ratio: f64,
    /// Domain extent on the negative side (ξ ∈ [-l_minus, l_plus]).
    pub l_minus: f64,
    pub l_plus: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { h_core: 0.08, w_core: 40.0, ratio: 1.06, l_minus: 300.0, l_plus: 300.0 }
    }
}

impl Mesh {
    pub fn graded(spec: &MeshSpec) -> Mesh {
        let mut right = vec![0.0f64];
        let mut x = 0.0;
        let mut h = spec.h_core;
        while x < spec.l_plus {
            if x > spec.w_core.min(spec.l_plus) {
                h *= spec.ratio;
            }
            x = (x + h).min(spec.l_plus);
            right.push(x);
        }
        let mut left = Vec::new();
        x = 0.0;
        h = spec.h_core;
        while x < spec.l_minus {
            if x > spec.w_core.min(spec.l_minus) {
                h *= spec.ratio;
            }
            x = (x + h).min(spec.l_minus);
            left.push(-x);
        }
        left.reverse();
        left.extend_from_slice(&right);
        Mesh { x: left }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Index of the node nearest ξ = 0.
    pub fn center_index(&self) -> usize {
        let mut best = 0;
        for (i, &xi) in self.x.iter().enumerate() {
            if xi.abs() < self.x[best].abs() {
                best = i;
            }
        }
        best
    }

    /// Trapezoidal quadrature weights.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = self.x[i + 1] - self.x[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        w
    }

    /// Trapezoid with Euler-Maclaurin end corrections (one-sided slope
    /// estimates). For integrands that have decayed at the ends the
    /// correction vanishes.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let n = self.n();
        assert_eq!(f.len(), n);
        let mut s = 0.0;
        for i in 0..n - 1 {
            s += 0.5 * (self.x[i + 1] - self.x[i]) * (f[i] + f[i + 1]);
        }
        if n >= 3 {
            let h0 = self.x[1] - self.x[0];
            let fp0 = (f[1] - f[0]) / h0;
            let h1 = self.x[n - 1] - self.x[n - 2];
            let fp1 = (f[n - 1] - f[n - 2]) / h1;
            s += (h0 * h0 * fp0 - h1 * h1 * fp1) / 12.0;
        }
        s
    }

    /// Split the cells listed in `marks` (indices of the left node of each
    /// cell) at their midpoints.
    pub fn refine(&self, marks: &[usize]) -> Mesh {
        let mut out = Vec::with_capacity(self.n() + marks.len());
        for i in 0..self.n() - 1 {
            out.push(self.x[i]);
            if marks.contains(&i) {
                out.push(0.5 * (self.x[i] + self.x[i + 1]));
            }
        }
        out.push(self.x[self.n() - 1]);
        Mesh { x: out }
    }

    /// Globally halve every cell.
    pub fn halve(&self) -> Mesh {
        let marks: Vec<usize> = (0..self.n() - 1).collect();
        self.refine(&marks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_covers_domain_monotonically() {
        let m = Mesh::graded(&MeshSpec { l_minus: 1000.0, l_plus: 200.0, ..Default::default() });
        assert!((m.x[0] + 1000.0).abs() < 1e-12);
        assert!((m.x[m.n() - 1] - 200.0).abs() < 1e-12);
        for i in 0..m.n() - 1 {
            assert!(m.x[i + 1] > m.x[i]);
        }
    }

    #[test]
    fn quadrature_handles_decayed_integrand() {
        let m = Mesh::graded(&MeshSpec { l_minus: 60.0, l_plus: 60.0, h_core: 0.05, ..Default::default() });
        let f: Vec<f64> = m.x.iter().map(|&x| (-0.5 * x * x).exp()).collect();
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((m.integrate(&f) - exact).abs() < 1e-6);
    }

    #[test]
    fn refinement_splits_requested_cells() {
        let m = Mesh { x: vec![0.0, 1.0, 2.0, 3.0] };
        let r = m.refine(&[1]);
        assert_eq!(r.x, vec![0.0, 1.0, 1.5, 2.0, 3.0]);
        assert_eq!(m.halve().n(), 7);
    }
}
