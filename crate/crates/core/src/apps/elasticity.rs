//! Linear plane-strain elasticity on a structured cantilever mesh.
//!
//! The beam `[0, 4] × [0, 1]` is split into `nx × ny` rectangles, each cut
//! into two triangles along its rising diagonal, with piecewise linear
//! elements. The left edge is clamped and its unknowns are eliminated; the
//! right edge carries a uniform traction in direction `(1, 1)`.
//!
//! Unknowns are interleaved, `(u_x, u_y)` per node, nodes numbered row by row.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const LENGTH: f64 = 4.0;
pub const HEIGHT: f64 = 1.0;

/// Young's modulus, Poisson ratio and density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    pub rho: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self {
            young: 200.0,
            poisson: 0.3,
            rho: 1.0,
        }
    }
}

impl Material {
    /// Plane-strain Lamé constants `(μ, λ)`.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young, self.poisson);
        (
            e / (2.0 * (1.0 + nu)),
            e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.young > 0.0 && self.rho > 0.0 && self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(Error::config(format!(
                "material needs E > 0, rho > 0 and -1 < nu < 0.5, got {:?}",
                self
            )));
        }
        Ok(())
    }
}

/// Matrices before the Dirichlet elimination.
#[derive(Clone, Debug)]
pub struct FullSystem {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// `∫_{Γ_N} (1, 1)·ψ ds` for every basis function `ψ`.
    pub load: DVector<f64>,
    pub coords: Vec<[f64; 2]>,
    /// Unknowns on the clamped edge.
    pub fixed: Vec<usize>,
}

/// Matrices acting on the free unknowns only.
#[derive(Clone, Debug)]
pub struct Cantilever {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub load: DVector<f64>,
    /// Original unknown index of every free unknown.
    pub free: Vec<usize>,
    pub coords: Vec<[f64; 2]>,
    /// Free index of the horizontal displacement at the upper right corner.
    pub probe: usize,
}

fn node(nx: usize, i: usize, j: usize) -> usize {
    j * (nx + 1) + i
}

/// Element stiffness `area·BᵀDB` for strain `(ε_xx, ε_yy, 2ε_xy)`.
fn element_stiffness(p: [[f64; 2]; 3], mu: f64, lambda: f64) -> ([[f64; 6]; 6], f64) {
    let [[x1, y1], [x2, y2], [x3, y3]] = p;
    let det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    let area = 0.5 * det.abs();
    let b = [(y2 - y3) / det, (y3 - y1) / det, (y1 - y2) / det];
    let c = [(x3 - x2) / det, (x1 - x3) / det, (x2 - x1) / det];
    let mut bm = [[0.0; 6]; 3];
    for a in 0..3 {
        bm[0][2 * a] = b[a];
        bm[1][2 * a + 1] = c[a];
        bm[2][2 * a] = c[a];
        bm[2][2 * a + 1] = b[a];
    }
    let d = [
        [lambda + 2.0 * mu, lambda, 0.0],
        [lambda, lambda + 2.0 * mu, 0.0],
        [0.0, 0.0, mu],
    ];
    let mut k = [[0.0; 6]; 6];
    for r in 0..6 {
        for s in r..6 {
            let mut v = 0.0;
            for (p, drow) in d.iter().enumerate() {
                for (q, &dpq) in drow.iter().enumerate() {
                    v += bm[p][r] * dpq * bm[q][s];
                }
            }
            k[r][s] = area * v;
            k[s][r] = area * v;
        }
    }
    (k, area)
}

/// Assembles stiffness, consistent mass and the edge load on the full mesh.
pub fn assemble_full(nx: usize, ny: usize, material: Material) -> Result<FullSystem> {
    if nx == 0 || ny == 0 {
        return Err(Error::config(format!(
            "cantilever mesh needs nx, ny >= 1, got {nx} x {ny}"
        )));
    }
    material.validate()?;
    let (mu, lambda) = material.lame();
    let (dx, dy) = (LENGTH / nx as f64, HEIGHT / ny as f64);
    let nodes = (nx + 1) * (ny + 1);
    let mut coords = Vec::with_capacity(nodes);
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push([i as f64 * dx, j as f64 * dy]);
        }
    }
    let n = 2 * nodes;
    let mut stiffness = DMatrix::zeros(n, n);
    let mut mass = DMatrix::zeros(n, n);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b) = (node(nx, i, j), node(nx, i + 1, j));
            let (c, d) = (node(nx, i + 1, j + 1), node(nx, i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                let (ke, area) =
                    element_stiffness([coords[tri[0]], coords[tri[1]], coords[tri[2]]], mu, lambda);
                let dofs: Vec<usize> = tri.iter().flat_map(|&v| [2 * v, 2 * v + 1]).collect();
                for r in 0..6 {
                    for s in 0..6 {
                        stiffness[(dofs[r], dofs[s])] += ke[r][s];
                    }
                }
                // ρ·area/12·(1 + δ_ab), per component
                for (p, &va) in tri.iter().enumerate() {
                    for (q, &vb) in tri.iter().enumerate() {
                        let m = material.rho * area / 12.0 * if p == q { 2.0 } else { 1.0 };
                        mass[(2 * va, 2 * vb)] += m;
                        mass[(2 * va + 1, 2 * vb + 1)] += m;
                    }
                }
            }
        }
    }
    let mut load = DVector::zeros(n);
    for j in 0..ny {
        for v in [node(nx, nx, j), node(nx, nx, j + 1)] {
            load[2 * v] += 0.5 * dy;
            load[2 * v + 1] += 0.5 * dy;
        }
    }
    let fixed = (0..=ny)
        .flat_map(|j| [2 * node(nx, 0, j), 2 * node(nx, 0, j) + 1])
        .collect();
    Ok(FullSystem {
        stiffness,
        mass,
        load,
        coords,
        fixed,
    })
}

/// Full assembly followed by elimination of the clamped unknowns.
pub fn assemble_cantilever(nx: usize, ny: usize, material: Material) -> Result<Cantilever> {
    let full = assemble_full(nx, ny, material)?;
    let n = full.load.len();
    let free: Vec<usize> = (0..n).filter(|d| !full.fixed.contains(d)).collect();
    let pick =
        |m: &DMatrix<f64>| DMatrix::from_fn(free.len(), free.len(), |r, s| m[(free[r], free[s])]);
    let corner = 2 * node(nx, nx, ny);
    let probe = free
        .iter()
        .position(|&d| d == corner)
        .expect("corner is free");
    Ok(Cantilever {
        stiffness: pick(&full.stiffness),
        mass: pick(&full.mass),
        load: DVector::from_fn(free.len(), |r, _| full.load[free[r]]),
        coords: full.coords,
        free,
        probe,
    })
}
