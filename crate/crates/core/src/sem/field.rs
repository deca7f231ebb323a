use std::ops::{Index, IndexMut};

use super::mesh::BoxMesh;
use crate::error::{contract, Result};
use crate::scalar::{cast, Precision, Real};

/// Per-element nodal values (`E * (N+1)^3`, unassembled) at working precision
/// `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    data: Vec<T>,
    points_per_element: usize,
}

impl<T: Real> Field<T> {
    pub fn zeros(mesh: &BoxMesh) -> Self {
        Self {
            data: vec![T::zero(); mesh.local_len()],
            points_per_element: mesh.points_per_element(),
        }
    }

    pub fn from_vec(mesh: &BoxMesh, data: Vec<T>) -> Result<Self> {
        contract(data.len() == mesh.local_len(), || {
            format!(
                "field length {} does not match mesh ({})",
                data.len(),
                mesh.local_len()
            )
        })?;
        Ok(Self {
            data,
            points_per_element: mesh.points_per_element(),
        })
    }

    /// Field from a function of the local node index.
    pub fn from_fn(mesh: &BoxMesh, f: impl FnMut(usize) -> T) -> Self {
        Self {
            data: (0..mesh.local_len()).map(f).collect(),
            points_per_element: mesh.points_per_element(),
        }
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn points_per_element(&self) -> usize {
        self.points_per_element
    }

    pub fn element(&self, e: usize) -> &[T] {
        let n = self.points_per_element;
        &self.data[e * n..(e + 1) * n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Copy rounded (or widened) to precision `U`.
    pub fn cast<U: Real>(&self) -> Field<U> {
        Field {
            data: self.data.iter().map(|&x| cast(x)).collect(),
            points_per_element: self.points_per_element,
        }
    }

    pub fn matches(&self, mesh: &BoxMesh) -> bool {
        self.data.len() == mesh.local_len() && self.points_per_element == mesh.points_per_element()
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }
}

impl<T> Index<usize> for Field<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for Field<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}
