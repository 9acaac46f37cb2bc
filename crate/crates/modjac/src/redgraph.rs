//! Dual graphs of the special fibers of `X_0(pq)` at the bad primes, their
//! component groups as critical groups, and the reduction maps of cusps.
//!
//! At a bad prime `q >= 5` the special fiber is two projective lines (the
//! reductions of `X_0(p)`) crossing at the supersingular points of `X_0(p)`
//! in characteristic `q`; a crossing with automorphism weight `e` becomes a
//! chain of length `e` in the minimal regular model. The component group of
//! the Jacobian is the critical group of the resulting two-hub chain graph,
//! and cusps reduce onto the hub their label is attached to (labels coprime
//! to `q` on one hub, the rest on the other).

use crate::arith::{is_prime, legendre};
use crate::zlinalg::Presentation;
use crate::{AbGroup, IntMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RedGraphError {
    /// Supersingular inventory rules cover characteristic >= 5 only.
    UnsupportedCharacteristic(u64),
    /// Edge-count divisibility failed, signalling an inventory bug.
    BadInventory(String),
    NotPrime(u64),
}

impl fmt::Display for RedGraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RedGraphError::UnsupportedCharacteristic(q) => {
                write!(
                    f,
                    "supersingular inventory unsupported in characteristic {q}"
                )
            }
            RedGraphError::BadInventory(s) => write!(f, "inventory inconsistency: {s}"),
            RedGraphError::NotPrime(p) => write!(f, "{p} is not prime"),
        }
    }
}

impl std::error::Error for RedGraphError {}

/// Supersingular classes of `X(1)` in characteristic `q >= 5`, as a sorted
/// list of automorphism weights (1, 2 for the j = 1728 class, 3 for j = 0).
/// The exact mass identity `sum 1/e = (q - 1)/12` pins the count.
pub fn supersingular_inventory(q: u64) -> Result<Vec<u32>, RedGraphError> {
    if !is_prime(q) {
        return Err(RedGraphError::NotPrime(q));
    }
    if q < 5 {
        return Err(RedGraphError::UnsupportedCharacteristic(q));
    }
    let mut mass = BigRational::new(BigInt::from(q - 1), BigInt::from(12));
    let mut weights = Vec::new();
    if q % 3 == 2 {
        weights.push(3);
        mass -= BigRational::new(BigInt::one(), BigInt::from(3));
    }
    if q % 4 == 3 {
        weights.push(2);
        mass -= BigRational::new(BigInt::one(), BigInt::from(2));
    }
    if !mass.denom().is_one() || mass.numer() < &BigInt::zero() {
        return Err(RedGraphError::BadInventory(format!(
            "residual mass {mass} for q = {q}"
        )));
    }
    let ordinary: usize = mass.numer().to_string().parse().unwrap();
    let mut out = vec![1u32; ordinary];
    out.extend(weights.into_iter().rev());
    out.sort_unstable();
    Ok(out)
}

/// Mass identity for a finished graph: `sum of 1/length` over edges equals
/// `(q - 1)(p + 1)/12` exactly.
pub fn mass_identity_holds(graph: &DualGraph) -> bool {
    let mut s = BigRational::zero();
    for &l in &graph.edge_lengths {
        s += BigRational::new(BigInt::one(), BigInt::from(l));
    }
    s == BigRational::new(
        BigInt::from((graph.q - 1) * (graph.p + 1)),
        BigInt::from(12u32),
    )
}

/// Hub of the two-vertex dual graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hub {
    Infinity,
    Zero,
}

/// Weighted two-vertex dual graph of the special fiber of `X_0(pq)` at `q`,
/// with the four cusps placed on hubs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGraph {
    /// The surviving prime: the special fiber is two copies of X_0(p).
    pub p: u64,
    /// The residue characteristic.
    pub q: u64,
    /// Sorted chain lengths, one per supersingular crossing.
    pub edge_lengths: Vec<u32>,
    /// The four cusp labels (divisors of pq) with their hubs.
    pub cusps: Vec<(u64, Hub)>,
}

impl DualGraph {
    pub fn hub_of(&self, label: u64) -> Hub {
        self.cusps
            .iter()
            .find(|(d, _)| *d == label)
            .map(|(_, h)| *h)
            .expect("cusp label")
    }
}

fn cusp_placement(p: u64, q: u64) -> Vec<(u64, Hub)> {
    // labels coprime to the residue characteristic reduce to one hub, the
    // others to the second
    [1, p, q, p * q]
        .into_iter()
        .map(|d| (d, if d % q == 0 { Hub::Zero } else { Hub::Infinity }))
        .collect()
}

/// Dual graph of the special fiber of `X_0(pq)` at `q`: the fiber of the
/// degree-(p+1) map over each supersingular class contributes its edges.
pub fn dual_graph(p: u64, q: u64) -> Result<DualGraph, RedGraphError> {
    if !is_prime(p) || p < 3 {
        return Err(RedGraphError::NotPrime(p));
    }
    if p == q {
        return Err(RedGraphError::BadInventory("p = q".into()));
    }
    let inventory = supersingular_inventory(q)?;
    let mut edge_lengths = Vec::new();
    for weight in inventory {
        match weight {
            1 => edge_lengths.extend(std::iter::repeat_n(1u32, (p + 1) as usize)),
            2 => {
                let nu2 = if p == 2 {
                    1
                } else {
                    (1 + legendre(-1, p)) as u64
                };
                let rest = p + 1 - nu2;
                if rest % 2 != 0 {
                    return Err(RedGraphError::BadInventory(format!(
                        "weight-2 fiber over p = {p}: {rest} not even"
                    )));
                }
                edge_lengths.extend(std::iter::repeat_n(2u32, nu2 as usize));
                edge_lengths.extend(std::iter::repeat_n(1u32, (rest / 2) as usize));
            }
            3 => {
                let nu3 = if p == 3 {
                    1
                } else {
                    (1 + legendre(-3, p)) as u64
                };
                let rest = p + 1 - nu3;
                if rest % 3 != 0 {
                    return Err(RedGraphError::BadInventory(format!(
                        "weight-3 fiber over p = {p}: {rest} not divisible by 3"
                    )));
                }
                edge_lengths.extend(std::iter::repeat_n(3u32, nu3 as usize));
                edge_lengths.extend(std::iter::repeat_n(1u32, (rest / 3) as usize));
            }
            w => {
                return Err(RedGraphError::BadInventory(format!("weight {w}")));
            }
        }
    }
    edge_lengths.sort_unstable();
    let graph = DualGraph {
        p,
        q,
        edge_lengths,
        cusps: cusp_placement(p, q),
    };
    debug_assert!(mass_identity_holds(&graph));
    Ok(graph)
}

/// Build a graph from explicitly supplied chain lengths (used when the
/// characteristic is outside the automatic inventory rules and the fiber
/// data comes from configuration).
pub fn dual_graph_from_lengths(p: u64, q: u64, lengths: &[u32]) -> DualGraph {
    let mut edge_lengths = lengths.to_vec();
    edge_lengths.sort_unstable();
    DualGraph {
        p,
        q,
        edge_lengths,
        cusps: cusp_placement(p, q),
    }
}

/// Component group of the Jacobian at the graph's prime, computed two ways:
/// as the critical group of the unit-edge subdivision and as the cokernel of
/// the cycle Gram matrix.
#[derive(Clone, Debug)]
pub struct ComponentGroupData {
    pub group: AbGroup,
    /// Order of the class of `v_infinity - v_zero`.
    pub hub_difference_order: BigInt,
    /// Orders of the classes of the cusp differences `[1] - [d]`.
    pub cusp_difference_orders: Vec<(u64, BigInt)>,
    presentation: Presentation<BigInt>,
    hub_vector: Vec<BigInt>,
}

impl ComponentGroupData {
    /// Order of `a * ([1] - [p]) + b * ([1] - [q])` in the component group.
    pub fn combination_order(&self, graph: &DualGraph, a: i64, b: i64) -> BigInt {
        let coef = |label: u64| -> i64 {
            match graph.hub_of(label) {
                Hub::Infinity => 0,
                Hub::Zero => 1,
            }
        };
        // [1] - [d] maps to (coef(d) - coef(1)) * (v_inf - v_0); [1] is
        // always on the Infinity hub at the reduction prime
        let total = a * coef(graph.p) + b * coef(graph.q);
        let v: Vec<BigInt> = self
            .hub_vector
            .iter()
            .map(|x| x * BigInt::from(total))
            .collect();
        self.presentation.element_order(&v).expect("finite group")
    }

    /// Subgroup generated by the images of both cusp differences.
    pub fn cuspidal_image_order(&self, graph: &DualGraph) -> BigInt {
        let gens: Vec<Vec<BigInt>> = [graph.p, graph.q]
            .iter()
            .filter(|&&d| graph.hub_of(d) == Hub::Zero)
            .map(|_| self.hub_vector.clone())
            .collect();
        self.presentation
            .subgroup_order(&gens)
            .expect("finite group")
    }

    /// Cokernel of the full cuspidal image in the component group.
    pub fn cuspidal_cokernel(&self, graph: &DualGraph) -> AbGroup {
        let gens: Vec<Vec<BigInt>> = [graph.p, graph.q]
            .iter()
            .filter(|&&d| graph.hub_of(d) == Hub::Zero)
            .map(|_| self.hub_vector.clone())
            .collect();
        self.presentation.quotient_by(&gens).expect("finite group")
    }
}

/// Critical group of the subdivided two-hub chain graph, with the class of
/// the hub difference and each cusp difference tracked.
pub fn component_group(graph: &DualGraph) -> ComponentGroupData {
    // subdivided graph: hub 0 = V_inf, hub 1 = V_0, then chain interiors
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut next = 2usize;
    for &l in &graph.edge_lengths {
        let mut prev = 0usize;
        for _ in 0..l - 1 {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    let nv = next;
    let mut lap = IntMatrix::zero(nv, nv);
    for (u, v) in edges {
        lap[(u, u)] = lap[(u, u)].clone() + BigInt::one();
        lap[(v, v)] = lap[(v, v)].clone() + BigInt::one();
        lap[(u, v)] = lap[(u, v)].clone() - BigInt::one();
        lap[(v, u)] = lap[(v, u)].clone() - BigInt::one();
    }
    // reduced Laplacian: delete the V_0 row and column
    let keep: Vec<usize> = (0..nv).filter(|&i| i != 1).collect();
    let mut reduced = IntMatrix::zero(nv - 1, nv - 1);
    for (i, &vi) in keep.iter().enumerate() {
        for (j, &vj) in keep.iter().enumerate() {
            reduced[(i, j)] = lap[(vi, vj)].clone();
        }
    }
    let presentation = Presentation::new(nv - 1, &reduced);
    let group = presentation
        .group()
        .expect("connected graph has finite critical group");

    // cross-check against the cycle Gram matrix cokernel
    let gram = cycle_gram(&graph.edge_lengths);
    let gram_group =
        crate::zlinalg::abgroup_from_relations(gram.rows(), &gram).expect("full-rank Gram matrix");
    assert_eq!(
        group, gram_group,
        "subdivision and Gram presentations disagree for {:?}",
        graph.edge_lengths
    );
    // and against the closed two-vertex formula: order = prod(l) * sum(1/l)
    let mut tree_count = BigRational::zero();
    let prod: BigInt = graph
        .edge_lengths
        .iter()
        .map(|&l| BigInt::from(l))
        .product();
    for &l in &graph.edge_lengths {
        tree_count += BigRational::new(prod.clone(), BigInt::from(l));
    }
    assert!(tree_count.denom().is_one());
    assert_eq!(
        group.order(),
        tree_count.numer().clone(),
        "spanning-tree count mismatch"
    );

    let mut hub_vector = vec![BigInt::zero(); nv - 1];
    hub_vector[0] = BigInt::one(); // v_inf - v_0 in reduced coordinates
    let hub_difference_order = presentation
        .element_order(&hub_vector)
        .expect("finite group");
    let cusp_difference_orders = graph
        .cusps
        .iter()
        .map(|&(d, h)| {
            let ord = match h {
                Hub::Infinity => BigInt::one(),
                Hub::Zero => hub_difference_order.clone(),
            };
            (d, ord)
        })
        .collect();
    ComponentGroupData {
        group,
        hub_difference_order,
        cusp_difference_orders,
        presentation,
        hub_vector,
    }
}

/// Cycle Gram matrix of the two-hub chain graph on the cycles
/// `e_1 - e_{i+1}`: `G_ij = l_1 + delta_ij * l_{i+1}`.
pub fn cycle_gram(lengths: &[u32]) -> IntMatrix {
    let s = lengths.len();
    assert!(s >= 1);
    let mut g = IntMatrix::zero(s - 1, s - 1);
    for i in 0..s - 1 {
        for j in 0..s - 1 {
            let mut v = BigInt::from(lengths[0]);
            if i == j {
                v += BigInt::from(lengths[i + 1]);
            }
            g[(i, j)] = v;
        }
    }
    g
}

/// Orders of the cusp reduction maps and the exact-sequence data at the
/// graph's prime: the orders of the images of `[1] - [p]` and `[1] - [q]`,
/// the order of the full cuspidal image and its cokernel in the component
/// group. Orders are keyed by the cusp label to avoid any dependence on
/// which of the two primes is the residue characteristic.
#[derive(Clone, Debug)]
pub struct CuspReductionReport {
    /// (label d, order of the class of [1] - [d]); order 1 means the
    /// difference reduces to zero.
    pub orders: Vec<(u64, BigInt)>,
    pub image_order: BigInt,
    pub cokernel: AbGroup,
}

impl CuspReductionReport {
    pub fn order_for(&self, label: u64) -> &BigInt {
        &self
            .orders
            .iter()
            .find(|(d, _)| *d == label)
            .expect("label")
            .1
    }
}

pub fn cusp_reduction_map(graph: &DualGraph, data: &ComponentGroupData) -> CuspReductionReport {
    let order_of = |label: u64| -> BigInt {
        match graph.hub_of(label) {
            Hub::Infinity => BigInt::one(), // same hub as [1]: reduces to 0
            Hub::Zero => data.hub_difference_order.clone(),
        }
    };
    CuspReductionReport {
        orders: vec![(graph.p, order_of(graph.p)), (graph.q, order_of(graph.q))],
        image_order: data.cuspidal_image_order(graph),
        cokernel: data.cuspidal_cokernel(graph),
    }
}

#[cfg(test)]
mod tests;
