//! Q1 finite-element assembly on the unit square with a uniform mesh and
//! homogeneous Dirichlet boundary conditions, plus the target-state data.
//!
//! Interior nodes are ordered lexicographically, x fastest. The closed-form
//! 4x4 element matrices are exact for bilinear elements on square cells
//! (equivalently, 2x2 Gauss quadrature).

use crate::error::{Error, Result};
use crate::sparsela::csr::CsrMatrix;

/// Uniform mesh of (0,1)^2 with h = 2^-k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub k: u32,
    pub h: f64,
    /// Interior node count, (2^k - 1)^2.
    pub m: usize,
}

impl GridConfig {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("grid exponent k must be >= 2, got {k}")));
        }
        if k > 12 {
            return Err(Error::Config(format!("grid exponent k={k} would not fit in memory")));
        }
        let n = 1usize << k;
        Ok(GridConfig { k, h: 1.0 / n as f64, m: (n - 1) * (n - 1) })
    }

    /// Cells (and node intervals) per direction, 2^k.
    pub fn cells_per_side(&self) -> usize {
        1usize << self.k
    }

    /// Constant diagonal entry of the mass matrix, (4/9) h^2.
    pub fn theta(&self) -> f64 {
        4.0 / 9.0 * self.h * self.h
    }

    /// Coordinates of interior node `p` in lexicographic order (x fastest).
    pub fn node_coords(&self, p: usize) -> (f64, f64) {
        let nn = self.cells_per_side() - 1;
        let ix = p % nn + 1;
        let iy = p / nn + 1;
        (ix as f64 * self.h, iy as f64 * self.h)
    }
}

/// Q1 element mass matrix on an h-by-h cell, nodes counterclockwise from the
/// lower-left corner: (h^2/36) * [[4,2,1,2],[2,4,2,1],[1,2,4,2],[2,1,2,4]].
fn element_mass(h: f64) -> [[f64; 4]; 4] {
    let c = h * h / 36.0;
    let p = [
        [4.0, 2.0, 1.0, 2.0],
        [2.0, 4.0, 2.0, 1.0],
        [1.0, 2.0, 4.0, 2.0],
        [2.0, 1.0, 2.0, 4.0],
    ];
    p.map(|row| row.map(|v| c * v))
}

/// Q1 element stiffness matrix for the negative Laplacian on a square cell;
/// independent of h in two dimensions: (1/6) * [[4,-1,-2,-1],...].
fn element_stiffness() -> [[f64; 4]; 4] {
    let c = 1.0 / 6.0;
    let p = [
        [4.0, -1.0, -2.0, -1.0],
        [-1.0, 4.0, -1.0, -2.0],
        [-2.0, -1.0, 4.0, -1.0],
        [-1.0, -2.0, -1.0, 4.0],
    ];
    p.map(|row| row.map(|v| c * v))
}

fn assemble(grid: &GridConfig, elem: &[[f64; 4]; 4]) -> CsrMatrix {
    let n = grid.cells_per_side();
    let nn = n - 1;
    let interior = |gx: usize, gy: usize| -> Option<usize> {
        if gx >= 1 && gx <= nn && gy >= 1 && gy <= nn {
            Some((gy - 1) * nn + (gx - 1))
        } else {
            None
        }
    };
    let mut triplets = Vec::with_capacity(9 * grid.m);
    for cy in 0..n {
        for cx in 0..n {
            // cell corners counterclockwise from the lower-left node
            let corners = [(cx, cy), (cx + 1, cy), (cx + 1, cy + 1), (cx, cy + 1)];
            for (a, ca) in corners.iter().enumerate() {
                let Some(i) = interior(ca.0, ca.1) else { continue };
                for (b, cb) in corners.iter().enumerate() {
                    let Some(j) = interior(cb.0, cb.1) else { continue };
                    triplets.push((i, j, elem[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(grid.m, grid.m, triplets).expect("assembly indices are interior")
}

/// Mass matrix M on interior nodes; at most 9 nonzeros per row, constant
/// diagonal (4/9) h^2.
pub fn assemble_mass(grid: &GridConfig) -> CsrMatrix {
    assemble(grid, &element_mass(grid.h))
}

/// Stiffness matrix K (discrete negative Laplacian) on interior nodes.
pub fn assemble_stiffness(grid: &GridConfig) -> CsrMatrix {
    assemble(grid, &element_stiffness())
}

/// Q1 mass stencil on an n-by-n torus with mesh width h: the boundary-free
/// reference operator whose spectrum attains the stencil extremes
/// theta/4 and 9 theta/4 exactly (constant and checkerboard modes, n even).
/// Used to cross-check the closed-form spectral constants.
pub fn assemble_mass_periodic(h: f64, n: usize) -> CsrMatrix {
    assert!(n >= 4 && n % 2 == 0, "torus stencil wants an even grid, n >= 4");
    let elem = element_mass(h);
    let idx = |gx: usize, gy: usize| (gy % n) * n + (gx % n);
    let mut triplets = Vec::with_capacity(16 * n * n);
    for cy in 0..n {
        for cx in 0..n {
            let corners = [(cx, cy), (cx + 1, cy), (cx + 1, cy + 1), (cx, cy + 1)];
            for (a, ca) in corners.iter().enumerate() {
                for (b, cb) in corners.iter().enumerate() {
                    triplets.push((idx(ca.0, ca.1), idx(cb.0, cb.1), elem[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n * n, n * n, triplets).expect("torus indices are in range")
}

/// Nodal interpolation of the target state
/// y_d(x,y) = (2x-1)^2 (2y-1)^2 on (0,1/2)x(0,1/2), zero elsewhere.
pub fn interpolate_target(grid: &GridConfig) -> Vec<f64> {
    (0..grid.m)
        .map(|p| {
            let (x, y) = grid.node_coords(p);
            if x > 0.0 && x < 0.5 && y > 0.0 && y < 0.5 {
                let a = 2.0 * x - 1.0;
                let b = 2.0 * y - 1.0;
                a * a * b * b
            } else {
                0.0
            }
        })
        .collect()
}

/// The weak-form right-hand side M * ybar_d.
pub fn rhs_hat(mass: &CsrMatrix, ybar_d: &[f64]) -> Result<Vec<f64>> {
    mass.spmv(ybar_d)
}

/// Assembled matrices and target data for one grid.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub grid: GridConfig,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// Nodal coefficients of the target state (ybar_d).
    pub target_nodal: Vec<f64>,
    /// M * ybar_d (yhat_d).
    pub target_rhs: Vec<f64>,
}

impl FemSystem {
    pub fn build(grid: GridConfig) -> Result<Self> {
        let mass = assemble_mass(&grid);
        let stiffness = assemble_stiffness(&grid);
        let target_nodal = interpolate_target(&grid);
        let target_rhs = rhs_hat(&mass, &target_nodal)?;
        Ok(FemSystem { grid, mass, stiffness, target_nodal, target_rhs })
    }
}
