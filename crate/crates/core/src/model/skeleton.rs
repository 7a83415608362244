use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Joint layout shared by all bodies in a scene.
///
/// A 2-body graph has `2J` nodes; node `k` of body 2 is stored at index
/// `J + k`. Tree edges are within-body and listed once per body layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonSpec {
    pub joints: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
    pub bodies: usize,
}

impl SkeletonSpec {
    /// Shipped 18-joint layout used by the 2-person mocap benchmark.
    pub fn expi18() -> Self {
        serde_json::from_str(include_str!("../../assets/skeletons/expi18.json"))
            .expect("embedded expi18 skeleton is valid")
    }

    /// Tiny 3-joint chain for tests.
    pub fn toy3() -> Self {
        serde_json::from_str(include_str!("../../assets/skeletons/toy3.json"))
            .expect("embedded toy3 skeleton is valid")
    }

    /// Chain of `j` joints (used by the synthetic generator).
    pub fn chain(j: usize, bodies: usize) -> Self {
        SkeletonSpec {
            joints: (0..j).map(|i| format!("j{i}")).collect(),
            edges: (0..j.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            root: 0,
            bodies,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SkeletonSpec = serde_json::from_str(text).map_err(|e| Error::Config {
            message: format!("skeleton json: {e}"),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn joints_per_body(&self) -> usize {
        self.joints.len()
    }

    /// Total node count (`bodies * J`).
    pub fn node_count(&self) -> usize {
        self.bodies * self.joints.len()
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.joints.len();
        let fail = |message: String| Err(Error::Config { message });
        if j == 0 {
            return fail("skeleton has no joints".into());
        }
        if !(self.bodies == 1 || self.bodies == 2) {
            return fail(format!("bodies must be 1 or 2, got {}", self.bodies));
        }
        if self.root >= j {
            return fail(format!("root {} out of range for {j} joints", self.root));
        }
        if self.edges.len() != j - 1 {
            return fail(format!(
                "{} edges cannot form a tree over {j} joints",
                self.edges.len()
            ));
        }
        // union-find acyclicity check
        let mut parent: Vec<usize> = (0..j).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            if a >= j || b >= j {
                return fail(format!("edge ({a}, {b}) out of range"));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return fail(format!("edge ({a}, {b}) closes a cycle"));
            }
            parent[ra] = rb;
        }
        Ok(())
    }
}

/// Binary `[V, V]` mask over the 2-body node set: ones on the diagonal and on
/// symmetrized within-body tree edges, zeros across bodies.
///
/// Applied multiplicatively to the spatial adjacency after each optimizer
/// step so masked entries stay exactly zero.
pub fn kinematic_mask(spec: &SkeletonSpec) -> Tensor {
    let j = spec.joints_per_body();
    let v = spec.node_count();
    let mut mask = Tensor::zeros(&[v, v]);
    for i in 0..v {
        mask.data_mut()[i * v + i] = 1.0;
    }
    for body in 0..spec.bodies {
        let off = body * j;
        for &(a, b) in &spec.edges {
            mask.data_mut()[(off + a) * v + (off + b)] = 1.0;
            mask.data_mut()[(off + b) * v + (off + a)] = 1.0;
        }
    }
    mask
}

/// Free (unmasked) entry count of the kinematic mask: `V` diagonal entries
/// plus two per within-body edge.
pub fn kinematic_mask_free_entries(spec: &SkeletonSpec) -> usize {
    spec.node_count() + 2 * spec.bodies * spec.edges.len()
}
