//! Random test forms: i.i.d. uniform draws from a pool, with replacement,
//! grown as nested prefixes across a length grid.
//!
//! Sampling is with replacement so the same machinery covers 1000-item
//! pools (where a repeat is a sub-percent event) and the small pools where
//! 50 draws from 10 items necessarily repeat; a repeated index is an
//! independent replication of the item. Each trajectory draws the longest
//! form once and exposes every grid length as a prefix, so comparisons
//! across lengths share their early items.

use rand::Rng;

use crate::error::{Error, Result};
use crate::irt::ItemPool;
use crate::rng::RandomStream;

/// An ordered selection of pool indices; repeats allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestForm {
    indices: Vec<usize>,
}

impl TestForm {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Parameter("form must contain at least one item".into()));
        }
        Ok(TestForm { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn item_indices(&self) -> &[usize] {
        &self.indices
    }
}

/// One growing test form evaluated at several lengths: the draw of the
/// longest length, with every grid length a prefix of the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormTrajectory {
    grid: Vec<usize>,
    items: Vec<usize>,
}

impl FormTrajectory {
    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    /// All drawn indices, length `max(grid)`.
    pub fn items(&self) -> &[usize] {
        &self.items
    }

    /// The form at the k-th grid length.
    pub fn form_at(&self, k: usize) -> TestForm {
        TestForm {
            indices: self.items[..self.grid[k]].to_vec(),
        }
    }
}

/// Draw a form of `n` items uniformly with replacement.
pub fn sample_form(pool: &ItemPool, n: usize, stream: &RandomStream) -> Result<TestForm> {
    if n == 0 {
        return Err(Error::Parameter("form length must be at least 1".into()));
    }
    let mut rng = stream.rng();
    let size = pool.len();
    Ok(TestForm {
        indices: (0..n).map(|_| rng.gen_range(0..size)).collect(),
    })
}

/// Draw one trajectory across an ascending length grid. Under the same
/// stream, `sample_trajectory(pool, &[n], s)` and `sample_form(pool, n, s)`
/// produce the same items.
pub fn sample_trajectory(pool: &ItemPool, grid: &[usize], stream: &RandomStream) -> Result<FormTrajectory> {
    if grid.is_empty() {
        return Err(Error::Parameter("length grid must be non-empty".into()));
    }
    if grid[0] == 0 {
        return Err(Error::Parameter("grid lengths must be at least 1".into()));
    }
    if grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Parameter("length grid must be strictly increasing".into()));
    }
    let full = sample_form(pool, *grid.last().unwrap(), stream)?;
    Ok(FormTrajectory {
        grid: grid.to_vec(),
        items: full.indices,
    })
}
