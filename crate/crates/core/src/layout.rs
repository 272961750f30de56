//! Mode layouts and symplectic forms.
//!
//! Phase-space vectors over `n` modes can be arranged with all positions
//! first, `(x_1..x_n, p_1..p_n)`, or interleaved per mode,
//! `(x_1, p_1, .., x_n, p_n)`. The toolkit works in the former (`Xxpp`)
//! internally and converts at the boundaries.

use nalgebra::DMatrix;

/// Quadrature ordering convention for phase-space objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureOrder {
    /// `(x_1, .., x_n, p_1, .., p_n)`
    Xxpp,
    /// `(x_1, p_1, .., x_n, p_n)`
    Xpxp,
}

impl QuadratureOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuadratureOrder::Xxpp => "xxpp",
            QuadratureOrder::Xpxp => "xpxp",
        }
    }
}

/// Quadrature ordering plus mode count; determines the symplectic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    pub order: QuadratureOrder,
    pub n_modes: usize,
}

impl ModeLayout {
    pub fn xxpp(n_modes: usize) -> Self {
        ModeLayout { order: QuadratureOrder::Xxpp, n_modes }
    }

    pub fn xpxp(n_modes: usize) -> Self {
        ModeLayout { order: QuadratureOrder::Xpxp, n_modes }
    }

    /// Phase-space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    /// Coordinate index of the position quadrature of `mode`.
    pub fn x_index(&self, mode: usize) -> usize {
        debug_assert!(mode < self.n_modes);
        match self.order {
            QuadratureOrder::Xxpp => mode,
            QuadratureOrder::Xpxp => 2 * mode,
        }
    }

    /// Coordinate index of the momentum quadrature of `mode`.
    pub fn p_index(&self, mode: usize) -> usize {
        debug_assert!(mode < self.n_modes);
        match self.order {
            QuadratureOrder::Xxpp => self.n_modes + mode,
            QuadratureOrder::Xpxp => 2 * mode + 1,
        }
    }

    /// The symplectic form in this layout.
    pub fn omega(&self) -> DMatrix<f64> {
        make_omega(self.n_modes, self.order)
    }

    pub fn with_order(self, order: QuadratureOrder) -> Self {
        ModeLayout { order, n_modes: self.n_modes }
    }

    /// Source-index permutation realizing the change of ordering:
    /// `out[i] = in[perm[i]]`. Applying it twice is the identity.
    pub(crate) fn permutation_to(&self, target: QuadratureOrder) -> Vec<usize> {
        let n = self.n_modes;
        let mut perm = vec![0usize; 2 * n];
        match (self.order, target) {
            (a, b) if a == b => {
                for (i, p) in perm.iter_mut().enumerate() {
                    *p = i;
                }
            }
            (QuadratureOrder::Xxpp, QuadratureOrder::Xpxp) => {
                for j in 0..n {
                    perm[2 * j] = j;
                    perm[2 * j + 1] = n + j;
                }
            }
            (QuadratureOrder::Xpxp, QuadratureOrder::Xxpp) => {
                for j in 0..n {
                    perm[j] = 2 * j;
                    perm[n + j] = 2 * j + 1;
                }
            }
            _ => unreachable!(),
        }
        perm
    }
}

/// Build the symplectic form over `n_modes` modes in the given ordering.
///
/// In `Xxpp` ordering this is the block matrix `[[0, I], [-I, 0]]`; in
/// `Xpxp` ordering it is the direct sum of `n` copies of `[[0, 1], [-1, 0]]`.
pub fn make_omega(n_modes: usize, order: QuadratureOrder) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut omega = DMatrix::zeros(dim, dim);
    let layout = ModeLayout { order, n_modes };
    for j in 0..n_modes {
        let x = layout.x_index(j);
        let p = layout.p_index(j);
        omega[(x, p)] = 1.0;
        omega[(p, x)] = -1.0;
    }
    omega
}

/// Conjugate `m` by the permutation: `out[i, j] = m[perm[i], perm[j]]`.
pub(crate) fn permute_matrix(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(perm.len(), perm.len(), |i, j| m[(perm[i], perm[j])])
}
