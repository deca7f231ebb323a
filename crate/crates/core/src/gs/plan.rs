use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalar::Precision;
use crate::sem::BoxMesh;

/// Summation order used for shared dofs and global reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GsMode {
    /// Pairwise exchange: every rank sums its own contributions first, then
    /// the remote ones in contributor order, and keeps its own total.
    #[default]
    Sequential,
    /// Per-rank subtotals, then a cross-rank sum in rank order.
    Staged,
    /// Balanced binary tree over the contributor list.
    Tree,
    /// Chain of expansion-of-two combines, rounded once.
    Compensated,
}

impl GsMode {
    pub const ALL: [GsMode; 4] = [
        GsMode::Sequential,
        GsMode::Staged,
        GsMode::Tree,
        GsMode::Compensated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GsMode::Sequential => "sequential",
            GsMode::Staged => "staged",
            GsMode::Tree => "tree",
            GsMode::Compensated => "compensated",
        }
    }
}

impl fmt::Display for GsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GsMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GsMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown gather-scatter mode '{s}'")))
    }
}

/// One local copy of a global dof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Contributor {
    pub rank: u32,
    pub local: u32,
}

/// Simulated multi-rank communication plan for a mesh.
#[derive(Debug, Clone)]
pub struct GsPlan {
    ranks: usize,
    mode: GsMode,
    accumulate: Precision,
    rank_of_element: Vec<u32>,
    points_per_element: usize,
    offsets: Vec<usize>,
    entries: Vec<Contributor>,
}

/// Contiguous element blocks; the first `E mod R` ranks get one extra.
fn block_partition(elements: usize, ranks: usize) -> Vec<u32> {
    let base = elements / ranks;
    let extra = elements % ranks;
    let mut out = Vec::with_capacity(elements);
    for r in 0..ranks {
        let count = base + usize::from(r < extra);
        out.extend(std::iter::repeat_n(r as u32, count));
    }
    out
}

impl GsPlan {
    /// Partitions the elements into `ranks` contiguous blocks along the
    /// slowest element axis and builds the contributor lists.
    pub fn build(
        mesh: &BoxMesh,
        ranks: usize,
        mode: GsMode,
        accumulate: Precision,
    ) -> Result<Self> {
        let ne = mesh.elements();
        if ranks == 0 || ranks > ne {
            return Err(Error::Config(format!(
                "rank count {ranks} must be in [1, {ne}] (element count)"
            )));
        }
        let rank_of_element = block_partition(ne, ranks);
        let npe = mesh.points_per_element();
        let mut counts = vec![0usize; mesh.n_global + 1];
        for &g in &mesh.global_ids {
            counts[g + 1] += 1;
        }
        for i in 0..mesh.n_global {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut entries = vec![Contributor { rank: 0, local: 0 }; mesh.local_len()];
        // local indices increase, and ranks are monotone in the element index,
        // so each list comes out sorted by (rank, local)
        for (l, &g) in mesh.global_ids.iter().enumerate() {
            entries[fill[g]] = Contributor {
                rank: rank_of_element[l / npe],
                local: l as u32,
            };
            fill[g] += 1;
        }
        let plan = Self {
            ranks,
            mode,
            accumulate,
            rank_of_element,
            points_per_element: npe,
            offsets,
            entries,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Checks that every local dof appears in exactly one sorted contributor
    /// list.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.entries.len()];
        for g in 0..self.n_global() {
            let list = self.contributors(g);
            contract(!list.is_empty(), || {
                format!("global dof {g} has no contributor")
            })?;
            contract(list.windows(2).all(|w| w[0] < w[1]), || {
                format!("contributors of dof {g} not sorted")
            })?;
            for c in list {
                let l = c.local as usize;
                contract(l < seen.len() && !seen[l], || {
                    format!("local dof {l} listed twice")
                })?;
                seen[l] = true;
            }
        }
        contract(seen.iter().all(|&s| s), || "some local dof has no owner")
    }

    pub fn ranks(&self) -> usize {
        self.ranks
    }
    pub fn mode(&self) -> GsMode {
        self.mode
    }
    pub fn accumulate(&self) -> Precision {
        self.accumulate
    }
    pub fn n_global(&self) -> usize {
        self.offsets.len() - 1
    }
    pub fn local_len(&self) -> usize {
        self.entries.len()
    }
    pub fn rank_of_element(&self, e: usize) -> usize {
        self.rank_of_element[e] as usize
    }

    pub fn contributors(&self, g: usize) -> &[Contributor] {
        &self.entries[self.offsets[g]..self.offsets[g + 1]]
    }

    /// Local-dof range owned by each rank.
    pub fn rank_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.ranks);
        let mut start = 0;
        for r in 0..self.ranks as u32 {
            let count =
                self.rank_of_element.iter().filter(|&&x| x == r).count() * self.points_per_element;
            out.push(start..start + count);
            start += count;
        }
        out
    }

    /// Same topology with a different mode or accumulate precision.
    pub fn with(&self, mode: GsMode, accumulate: Precision) -> Self {
        Self {
            mode,
            accumulate,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::MeshSpec;

    #[test]
    fn single_element_single_contributor() {
        let mesh = BoxMesh::new(MeshSpec::cube(1, 3)).unwrap();
        let plan = GsPlan::build(&mesh, 1, GsMode::Sequential, Precision::Fp64).unwrap();
        assert!((0..plan.n_global()).all(|g| plan.contributors(g).len() == 1));
    }

    #[test]
    fn two_elements_two_ranks() {
        let mesh = BoxMesh::new(MeshSpec {
            ex: 2,
            ey: 1,
            ez: 1,
            degree: 2,
        })
        .unwrap();
        let plan = GsPlan::build(&mesh, 2, GsMode::Tree, Precision::Fp32).unwrap();
        let shared: Vec<_> = (0..plan.n_global())
            .filter(|&g| plan.contributors(g).len() == 2)
            .collect();
        assert_eq!(shared.len(), 9);
        for g in shared {
            let c = plan.contributors(g);
            assert_eq!((c[0].rank, c[1].rank), (0, 1));
        }
    }

    #[test]
    fn contributor_counts_partition_local_dofs() {
        let mesh = BoxMesh::new(MeshSpec {
            ex: 3,
            ey: 2,
            ez: 2,
            degree: 3,
        })
        .unwrap();
        let plan = GsPlan::build(&mesh, 5, GsMode::Staged, Precision::Fp64).unwrap();
        let total: usize = (0..plan.n_global())
            .map(|g| plan.contributors(g).len())
            .sum();
        assert_eq!(total, mesh.elements() * 64);
        let ranges = plan.rank_ranges();
        assert_eq!(ranges.len(), 5);
        assert_eq!(ranges[0], 0..3 * 64);
        assert_eq!(ranges[4].end, mesh.local_len());
    }

    #[test]
    fn too_many_ranks() {
        let mesh = BoxMesh::new(MeshSpec::cube(1, 2)).unwrap();
        assert!(matches!(
            GsPlan::build(&mesh, 2, GsMode::Tree, Precision::Fp64),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mode_names_round_trip() {
        for m in GsMode::ALL {
            assert_eq!(m.as_str().parse::<GsMode>().unwrap(), m);
        }
        assert!("crystal".parse::<GsMode>().is_err());
    }
}
