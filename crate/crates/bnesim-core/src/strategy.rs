//! Finite-dimensional strategies of the discretized game.

use crate::game::{ActionSet, Side};
use alloc::vec;
use alloc::vec::Vec;

/// A discrete strategy for one subnetwork: one action block per type point,
/// stacked into a single vector of dimension `n_blocks * block_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStrategy {
    pub side: Side,
    pub n_blocks: usize,
    pub block_dim: usize,
    pub values: Vec<f64>,
}

impl BlockStrategy {
    pub fn new(side: Side, n_blocks: usize, block_dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_blocks * block_dim);
        Self {
            side,
            n_blocks,
            block_dim,
            values,
        }
    }

    /// All blocks set to the same action.
    pub fn constant(side: Side, n_blocks: usize, action: &[f64]) -> Self {
        let mut values = vec![0.0; n_blocks * action.len()];
        for r in 0..n_blocks {
            values[r * action.len()..(r + 1) * action.len()].copy_from_slice(action);
        }
        Self::new(side, n_blocks, action.len(), values)
    }

    /// Action block for type index `r` (0-based).
    #[inline]
    pub fn block(&self, r: usize) -> &[f64] {
        &self.values[r * self.block_dim..(r + 1) * self.block_dim]
    }

    #[inline]
    pub fn block_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.block_dim..(r + 1) * self.block_dim]
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// True when every block lies in the action set within `tol`.
    pub fn is_feasible(&self, set: &ActionSet, tol: f64) -> bool {
        (0..self.n_blocks).all(|r| set.distance(self.block(r)) <= tol)
    }
}
