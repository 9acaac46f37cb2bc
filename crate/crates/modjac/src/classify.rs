//! Point counts of the Jacobian over prime fields, the torsion gcd bound,
//! cyclotomic splitting searches, obstruction checks, and the bookkeeping
//! that classifies the odd kernel candidates of an equivariant isogeny to
//! the companion Shimura Jacobian.
//!
//! For an isogeny with odd constant kernel part `H`, the component groups at
//! a bad prime `r` satisfy `#Phi''(r) = #Phi(r) * #H_0 / #H_1` with `H_0`
//! and `H_1` the kernel and image of the reduction `H -> Phi(r)`; the odd
//! part of `Phi''(r)` must match the configured Shimura-side value. Constant
//! candidate parts take their reduction orders from the dual-graph module;
//! multiplicative (mu-type) parts are quantified over both the injective and
//! the trivial reduction branch.

use crate::arith::{factor, is_prime, mult_order};
use crate::hecke::{EtaleElt, HeckeError, HeckeOrder};
use crate::ideals::{eisenstein_ideal, EisensteinData, IdealError};
use crate::modsym::{build_space, ModSymSpace};
use crate::redgraph::{
    component_group, cusp_reduction_map, dual_graph, dual_graph_from_lengths, RedGraphError,
};
use crate::AbGroup;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub enum ClassifyError {
    Hecke(HeckeError),
    Ideal(IdealError),
    Graph(RedGraphError),
    /// jacobian_count needs an odd prime of good reduction.
    BadCountPrime(u64),
    /// A gating obstruction check failed; the candidate enumeration is not
    /// licensed and the classifier refuses to run.
    ObstructionFailed(ObstructionReport),
    /// The level constants are inconsistent with the computed data.
    InconsistentConstants(String),
    EmptyPrimeList,
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::Hecke(e) => write!(f, "{e}"),
            ClassifyError::Ideal(e) => write!(f, "{e}"),
            ClassifyError::Graph(e) => write!(f, "{e}"),
            ClassifyError::BadCountPrime(l) => {
                write!(
                    f,
                    "point counts need an odd prime of good reduction, got {l}"
                )
            }
            ClassifyError::ObstructionFailed(r) => {
                let tried: Vec<String> = r.attempts.iter().map(|a| a.ell.to_string()).collect();
                write!(
                    f,
                    "obstruction check failed: {}^{} divides #J(F_l) at every tried l ({})",
                    r.p,
                    r.forbidden_power,
                    tried.join(", ")
                )
            }
            ClassifyError::InconsistentConstants(s) => {
                write!(f, "inconsistent level constants: {s}")
            }
            ClassifyError::EmptyPrimeList => write!(f, "empty prime list"),
        }
    }
}

impl std::error::Error for ClassifyError {}

impl From<HeckeError> for ClassifyError {
    fn from(e: HeckeError) -> Self {
        ClassifyError::Hecke(e)
    }
}

impl From<IdealError> for ClassifyError {
    fn from(e: IdealError) -> Self {
        ClassifyError::Ideal(e)
    }
}

impl From<RedGraphError> for ClassifyError {
    fn from(e: RedGraphError) -> Self {
        ClassifyError::Graph(e)
    }
}

/// Whether the two-step filtration of `J[m_p]` splits as a direct product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingFlag {
    Split,
    NonSplit,
}

/// A cyclotomic splitting condition on a rational prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplittingCondition {
    /// Splits completely in the degree-p subfield of Q(mu_{p^2}):
    /// equivalently the order of l in (Z/p^2)^* is coprime to p.
    SplitsInKp { p: u64 },
    /// Congruent to 1 modulo every listed modulus.
    CongruenceOneMod { moduli: Vec<u64> },
}

/// One numeric obstruction: `p^forbidden_power` must fail to divide the
/// point count at some prime satisfying the condition, among the first
/// `max_candidates` such primes (every conditioned prime yields the same
/// contradiction, so any passing one establishes the exclusion).
/// Informational entries are reported but do not gate the classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionSpec {
    pub p: u64,
    pub condition: SplittingCondition,
    pub forbidden_power: u32,
    #[serde(default = "default_one")]
    pub max_candidates: u32,
    #[serde(default)]
    pub informational: bool,
}

fn default_one() -> u32 {
    1
}

/// Per-prime component-group data supplied by configuration instead of the
/// mass-formula graphs (used where the automatic inventory rules do not
/// apply, e.g. residue characteristic 3).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentOverride {
    pub invariants: Vec<u64>,
    /// Order of the image of [1] - [r] at the prime r itself.
    pub crossing_order: u64,
    /// Chain lengths of the special fiber, when known (checked against the
    /// invariants if both are given).
    #[serde(default)]
    pub edge_lengths: Option<Vec<u32>>,
}

/// Everything the classifier consumes that the pipeline does not compute:
/// the cuspidal group presentation, the multiplicative part of the Shimura
/// subgroup, splitting flags for `J[m_p]`, the Shimura-side component group
/// orders, obstruction specs, and any per-prime component overrides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelConstants {
    pub level: u64,
    /// Orders of the cusp classes c_p = [1]-[p] and c_q = [1]-[q].
    pub cusp_order_p: u64,
    pub cusp_order_q: u64,
    /// Extra relations a*c_p + b*c_q = 0 beyond the orders.
    #[serde(default)]
    pub cusp_relations: Vec<(i64, i64)>,
    /// Odd mu-type invariant factors of the Shimura subgroup.
    pub sigma_odd_mu_orders: Vec<u64>,
    /// Splitting flag of the filtration of J[m_p] per odd Eisenstein prime.
    pub splitting: BTreeMap<u64, SplittingFlag>,
    /// Shimura-side component group orders per bad prime.
    pub shimura_phi_orders: BTreeMap<u64, u64>,
    #[serde(default)]
    pub component_overrides: BTreeMap<u64, ComponentOverride>,
    #[serde(default)]
    pub obstructions: Vec<ObstructionSpec>,
}

impl LevelConstants {
    /// Built-in constants for the three supported levels.
    pub fn builtin(level: u64) -> Option<LevelConstants> {
        match level {
            65 => Some(LevelConstants {
                level: 65,
                cusp_order_p: 28,
                cusp_order_q: 12,
                cusp_relations: vec![(14, -6)],
                sigma_odd_mu_orders: vec![3],
                splitting: BTreeMap::from([
                    (3, SplittingFlag::Split),
                    (7, SplittingFlag::NonSplit),
                ]),
                shimura_phi_orders: BTreeMap::from([(5, 6), (13, 42)]),
                component_overrides: BTreeMap::new(),
                obstructions: vec![
                    ObstructionSpec {
                        p: 7,
                        condition: SplittingCondition::SplitsInKp { p: 7 },
                        forbidden_power: 2,
                        max_candidates: 1,
                        informational: false,
                    },
                    ObstructionSpec {
                        p: 3,
                        condition: SplittingCondition::CongruenceOneMod {
                            moduli: vec![9, 13],
                        },
                        forbidden_power: 3,
                        max_candidates: 1,
                        informational: false,
                    },
                    // the classical check at the smallest prime split in
                    // Q(mu_7); reported for comparison with the tables
                    ObstructionSpec {
                        p: 7,
                        condition: SplittingCondition::CongruenceOneMod { moduli: vec![7] },
                        forbidden_power: 2,
                        max_candidates: 1,
                        informational: true,
                    },
                ],
            }),
            35 => Some(LevelConstants {
                level: 35,
                cusp_order_p: 8,
                cusp_order_q: 6,
                cusp_relations: vec![],
                sigma_odd_mu_orders: vec![3],
                splitting: BTreeMap::from([(3, SplittingFlag::Split)]),
                shimura_phi_orders: BTreeMap::from([(5, 12), (7, 24)]),
                component_overrides: BTreeMap::new(),
                obstructions: vec![ObstructionSpec {
                    p: 3,
                    condition: SplittingCondition::CongruenceOneMod { moduli: vec![9, 7] },
                    forbidden_power: 3,
                    max_candidates: 1,
                    informational: false,
                }],
            }),
            39 => Some(LevelConstants {
                level: 39,
                cusp_order_p: 14,
                cusp_order_q: 4,
                cusp_relations: vec![],
                sigma_odd_mu_orders: vec![],
                splitting: BTreeMap::from([(7, SplittingFlag::NonSplit)]),
                shimura_phi_orders: BTreeMap::from([(3, 4), (13, 28)]),
                component_overrides: BTreeMap::from([(
                    3,
                    ComponentOverride {
                        invariants: vec![28],
                        crossing_order: 14,
                        edge_lengths: Some(vec![1, 2, 2, 3]),
                    },
                )]),
                // the first two primes split in K_7 (19 and 31) have point
                // counts divisible by 7^2 at this level; the third one
                // establishes the exclusion
                obstructions: vec![ObstructionSpec {
                    p: 7,
                    condition: SplittingCondition::SplitsInKp { p: 7 },
                    forbidden_power: 2,
                    max_candidates: 5,
                    informational: false,
                }],
            }),
            _ => None,
        }
    }

    /// The cuspidal group from its presentation.
    pub fn cuspidal_group(&self) -> AbGroup {
        let mut rows = vec![
            vec![BigInt::from(self.cusp_order_p), BigInt::zero()],
            vec![BigInt::zero(), BigInt::from(self.cusp_order_q)],
        ];
        for (a, b) in &self.cusp_relations {
            rows.push(vec![BigInt::from(*a), BigInt::from(*b)]);
        }
        crate::zlinalg::abgroup_from_relations(2, &crate::IntMatrix::from_rows(rows))
            .expect("finite cuspidal group")
    }
}

/// A point count #J(F_l) with its factorization, computed through the
/// regular representation of `(1 + l) - T_l` on the Hecke lattice and
/// cross-checked against the determinant on the cuspidal lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobianCount {
    pub ell: u64,
    pub count: BigInt,
    pub factorization: Vec<(u64, u32)>,
    /// Etale coordinates of T_l.
    pub frobenius_trace: EtaleElt,
}

pub fn jacobian_count(
    space: &ModSymSpace,
    order: &HeckeOrder,
    ell: u64,
) -> Result<JacobianCount, ClassifyError> {
    if ell < 3 || !is_prime(ell) || space.level % ell == 0 {
        return Err(ClassifyError::BadCountPrime(ell));
    }
    let t = space.hecke_operator(ell).map_err(HeckeError::from)?;
    let e = order.etale_of_matrix(&t.matrix)?;
    let shifted = order.algebra.scalar(ell as i64 + 1).sub(&e);
    let count = order.norm_form(&shifted)?.abs();
    // second route: the determinant of (1 + l) - T_l on the rank-2g
    // cuspidal lattice is the square of the count
    let g2 = t.matrix.rows();
    let mut m = crate::IntMatrix::identity(g2).scale(&BigInt::from(ell + 1));
    m = m.sub(&t.matrix);
    let det = m.det().expect("square").abs();
    assert_eq!(
        det,
        &count * &count,
        "cuspidal-lattice determinant route disagrees"
    );
    Ok(JacobianCount {
        ell,
        count: count.clone(),
        factorization: factor(&count),
        frobenius_trace: e,
    })
}

/// gcd of point counts over a list of good odd primes.
pub fn torsion_gcd_bound(
    space: &ModSymSpace,
    order: &HeckeOrder,
    primes: &[u64],
) -> Result<(BigInt, Vec<JacobianCount>), ClassifyError> {
    if primes.is_empty() {
        return Err(ClassifyError::EmptyPrimeList);
    }
    let counts: Result<Vec<JacobianCount>, _> = primes
        .iter()
        .map(|&l| jacobian_count(space, order, l))
        .collect();
    let counts = counts?;
    let mut g = BigInt::zero();
    for c in &counts {
        g = g.gcd(&c.count);
    }
    Ok((g, counts))
}

/// Certificate for a splitting search: the smallest prime satisfying the
/// condition, with the verifying data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchCertificate {
    pub condition: SplittingCondition,
    pub prime: u64,
    /// Multiplicative order in (Z/p^2)^* for the K_p condition.
    pub order_mod_p2: Option<u64>,
    /// Residues modulo the listed moduli for congruence conditions.
    pub residues: Vec<(u64, u64)>,
}

/// Smallest prime satisfying a cyclotomic splitting condition.
pub fn splitting_search(condition: &SplittingCondition) -> SearchCertificate {
    let ell = next_condition_prime(condition, 1);
    certificate_for(condition, ell)
}

fn condition_holds(condition: &SplittingCondition, ell: u64) -> bool {
    match condition {
        SplittingCondition::SplitsInKp { p } => {
            // l splits completely in K_p iff its order in (Z/p^2)^* is
            // coprime to p, i.e. l^(p-1) = 1 mod p^2
            if ell % p == 0 {
                return false;
            }
            mult_order(ell, p * p) % p != 0
        }
        SplittingCondition::CongruenceOneMod { moduli } => moduli.iter().all(|&m| ell % m == 1),
    }
}

/// One attempted prime inside an obstruction check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstructionAttempt {
    pub ell: u64,
    pub certificate: SearchCertificate,
    pub count: BigInt,
    pub factorization: Vec<(u64, u32)>,
    pub passes: bool,
}

/// Outcome of one obstruction check: passes when some attempted prime
/// refutes the divisibility.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub p: u64,
    pub forbidden_power: u32,
    pub attempts: Vec<ObstructionAttempt>,
    pub passes: bool,
    pub informational: bool,
}

impl ObstructionReport {
    /// The prime that established the exclusion, when one did.
    pub fn witness(&self) -> Option<u64> {
        self.attempts.iter().find(|a| a.passes).map(|a| a.ell)
    }
}

/// Run one obstruction check: walk the primes satisfying the condition in
/// ascending order, count points there, and test that p^forbidden_power
/// fails to divide at some attempt.
pub fn obstruction_check(
    space: &ModSymSpace,
    order: &HeckeOrder,
    spec: &ObstructionSpec,
) -> Result<ObstructionReport, ClassifyError> {
    let mut attempts = Vec::new();
    let mut ell = 1u64;
    for _ in 0..spec.max_candidates.max(1) {
        ell = next_condition_prime(&spec.condition, ell);
        let certificate = certificate_for(&spec.condition, ell);
        let jc = jacobian_count(space, order, ell)?;
        let valuation = jc
            .factorization
            .iter()
            .find(|(q, _)| *q == spec.p)
            .map(|(_, e)| *e)
            .unwrap_or(0);
        let passes = valuation < spec.forbidden_power;
        attempts.push(ObstructionAttempt {
            ell,
            certificate,
            count: jc.count,
            factorization: jc.factorization,
            passes,
        });
        if passes {
            break;
        }
    }
    let passes = attempts.iter().any(|a| a.passes);
    Ok(ObstructionReport {
        p: spec.p,
        forbidden_power: spec.forbidden_power,
        attempts,
        passes,
        informational: spec.informational,
    })
}

fn next_condition_prime(condition: &SplittingCondition, after: u64) -> u64 {
    let mut ell = after + 1;
    loop {
        if is_prime(ell) && condition_holds(condition, ell) {
            return ell;
        }
        ell += 1;
    }
}

fn certificate_for(condition: &SplittingCondition, ell: u64) -> SearchCertificate {
    let (order_mod_p2, residues) = match condition {
        SplittingCondition::SplitsInKp { p } => (Some(mult_order(ell, p * p)), vec![]),
        SplittingCondition::CongruenceOneMod { moduli } => {
            (None, moduli.iter().map(|&m| (m, ell % m)).collect())
        }
    };
    SearchCertificate {
        condition: condition.clone(),
        prime: ell,
        order_mod_p2,
        residues,
    }
}

/// One factor of a kernel candidate at an odd Eisenstein prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartKind {
    /// The constant cuspidal part C_p.
    Constant,
    /// The mu-type part Sigma_p.
    Mu,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePart {
    pub prime: u64,
    pub kind: PartKind,
}

/// A formal odd kernel candidate: a product of at most one part per odd
/// Eisenstein prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelCandidate {
    pub parts: Vec<CandidatePart>,
}

impl KernelCandidate {
    pub fn name(&self) -> String {
        if self.parts.is_empty() {
            return "0".to_string();
        }
        self.parts
            .iter()
            .map(|p| match p.kind {
                PartKind::Constant => format!("C{}", p.prime),
                PartKind::Mu => format!("Sigma{}", p.prime),
            })
            .collect::<Vec<_>>()
            .join(" x ")
    }

    pub fn group_order(&self) -> u64 {
        self.parts.iter().map(|p| p.prime).product()
    }
}

/// Enumerate the odd kernel candidates: per odd Eisenstein prime p, the
/// proper submodules of J[m_p] are 0 and C_p, plus Sigma_p when the
/// filtration splits.
pub fn enumerate_candidates(
    consts: &LevelConstants,
    eis_quotient: &AbGroup,
) -> Vec<KernelCandidate> {
    let odd_primes: Vec<u64> = factor(&eis_quotient.order())
        .into_iter()
        .map(|(p, _)| p)
        .filter(|&p| p % 2 == 1)
        .collect();
    let mut cands = vec![KernelCandidate { parts: vec![] }];
    for p in odd_primes {
        let mut options: Vec<Option<CandidatePart>> = vec![None];
        options.push(Some(CandidatePart {
            prime: p,
            kind: PartKind::Constant,
        }));
        if consts.splitting.get(&p) == Some(&SplittingFlag::Split) {
            options.push(Some(CandidatePart {
                prime: p,
                kind: PartKind::Mu,
            }));
        }
        let mut next = Vec::new();
        for c in &cands {
            for o in &options {
                let mut parts = c.parts.clone();
                if let Some(part) = o {
                    parts.push(part.clone());
                }
                next.push(KernelCandidate { parts });
            }
        }
        cands = next;
    }
    cands
}

/// Reduction data of the cuspidal group at one bad prime.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiData {
    pub prime: u64,
    pub group: AbGroup,
    /// Order of the image of c_p = [1]-[p] in Phi.
    pub order_cp: BigInt,
    /// Order of the image of c_q = [1]-[q] in Phi.
    pub order_cq: BigInt,
    /// True when computed from the mass-formula graph, false when supplied
    /// by configuration.
    pub computed: bool,
}

/// Compute (or read from overrides) the component-group data at both bad
/// primes of the level.
pub fn phi_data(consts: &LevelConstants) -> Result<(PhiData, PhiData), ClassifyError> {
    let (p, q) = crate::arith::split_two_primes(consts.level)
        .ok_or_else(|| ClassifyError::InconsistentConstants("level is not p*q".into()))?;
    let data_at = |r: u64, other: u64| -> Result<PhiData, ClassifyError> {
        if let Some(over) = consts.component_overrides.get(&r) {
            // when chain lengths are supplied, run the graph machinery on
            // them and check the override invariants agree
            let group = if let Some(lengths) = &over.edge_lengths {
                let g = dual_graph_from_lengths(other, r, lengths);
                let c = component_group(&g);
                let expect: Vec<BigInt> =
                    over.invariants.iter().map(|&d| BigInt::from(d)).collect();
                if c.group.invariant_factors != expect {
                    return Err(ClassifyError::InconsistentConstants(format!(
                        "override at {r}: graph gives {}, config says {:?}",
                        c.group, over.invariants
                    )));
                }
                if c.hub_difference_order != BigInt::from(over.crossing_order) {
                    return Err(ClassifyError::InconsistentConstants(format!(
                        "override at {r}: crossing order {} vs {}",
                        c.hub_difference_order, over.crossing_order
                    )));
                }
                c.group
            } else {
                AbGroup {
                    invariant_factors: over.invariants.iter().map(|&d| BigInt::from(d)).collect(),
                }
            };
            let crossing = BigInt::from(over.crossing_order);
            let (order_cp, order_cq) = if r == p {
                (crossing, BigInt::one())
            } else {
                (BigInt::one(), crossing)
            };
            return Ok(PhiData {
                prime: r,
                group,
                order_cp,
                order_cq,
                computed: false,
            });
        }
        let graph = dual_graph(other, r)?;
        let comp = component_group(&graph);
        let report = cusp_reduction_map(&graph, &comp);
        Ok(PhiData {
            prime: r,
            group: comp.group.clone(),
            order_cp: report.order_for(p).clone(),
            order_cq: report.order_for(q).clone(),
            computed: true,
        })
    };
    Ok((data_at(p, q)?, data_at(q, p)?))
}

/// Candidate evaluation at one prime: predicted odd component-group orders,
/// one per branch assignment of the mu-type parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchPrediction {
    /// Branch labels for the mu parts: true = injects, false = trivial.
    pub mu_branches: Vec<(u64, bool)>,
    pub h0_odd: u64,
    pub h1_odd: u64,
    pub predicted_odd_order: BigInt,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub candidate: KernelCandidate,
    /// Per bad prime: the branch predictions and the required odd order.
    pub per_prime: Vec<(u64, Vec<BranchPrediction>, BigInt)>,
    pub survives: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationCertificate {
    pub level: u64,
    pub eisenstein_quotient: AbGroup,
    pub cuspidal_group: AbGroup,
    pub candidates: Vec<CandidateVerdict>,
    pub survivors: Vec<KernelCandidate>,
    pub obstructions: Vec<ObstructionReport>,
    pub phi_p: PhiData,
    pub phi_q: PhiData,
}

/// The classification proper, given computed Eisenstein data and component
/// groups plus the configured constants.
pub fn classify_kernel(
    consts: &LevelConstants,
    eis: &EisensteinData,
    phi_p: &PhiData,
    phi_q: &PhiData,
    obstructions: Vec<ObstructionReport>,
) -> Result<ClassificationCertificate, ClassifyError> {
    for r in &obstructions {
        if !r.informational && !r.passes {
            return Err(ClassifyError::ObstructionFailed(r.clone()));
        }
    }
    let (p, q) = crate::arith::split_two_primes(consts.level)
        .ok_or_else(|| ClassifyError::InconsistentConstants("level is not p*q".into()))?;
    check_consistency(consts, eis, phi_p, phi_q, p, q)?;

    let candidates = enumerate_candidates(consts, &eis.quotient);
    let cuspidal = consts.cuspidal_group();
    let mut verdicts = Vec::new();
    for cand in &candidates {
        let mut per_prime = Vec::new();
        let mut survives = true;
        for phi in [phi_p, phi_q] {
            let target = odd_part(&BigInt::from(
                *consts.shimura_phi_orders.get(&phi.prime).ok_or_else(|| {
                    ClassifyError::InconsistentConstants(format!(
                        "no Shimura component order at {}",
                        phi.prime
                    ))
                })?,
            ));
            let predictions = predictions_at(consts, cand, phi, p, q);
            let ok = predictions.iter().any(|b| b.predicted_odd_order == target);
            per_prime.push((phi.prime, predictions, target));
            survives &= ok;
        }
        verdicts.push(CandidateVerdict {
            candidate: cand.clone(),
            per_prime,
            survives,
        });
    }
    let survivors: Vec<KernelCandidate> = verdicts
        .iter()
        .filter(|v| v.survives)
        .map(|v| v.candidate.clone())
        .collect();
    Ok(ClassificationCertificate {
        level: consts.level,
        eisenstein_quotient: eis.quotient.clone(),
        cuspidal_group: cuspidal,
        candidates: verdicts,
        survivors,
        obstructions,
        phi_p: phi_p.clone(),
        phi_q: phi_q.clone(),
    })
}

fn check_consistency(
    consts: &LevelConstants,
    eis: &EisensteinData,
    phi_p: &PhiData,
    phi_q: &PhiData,
    p: u64,
    q: u64,
) -> Result<(), ClassifyError> {
    if consts.cusp_order_p == 0 || consts.cusp_order_q == 0 {
        return Err(ClassifyError::InconsistentConstants(
            "cusp orders must be positive".into(),
        ));
    }
    // cuspidal exponent divides #(T/E)
    let cusp = consts.cuspidal_group();
    let n = eis.quotient.order();
    if !(&n % cusp.exponent()).is_zero() {
        return Err(ClassifyError::InconsistentConstants(format!(
            "cuspidal exponent {} does not divide #(T/E) = {n}",
            cusp.exponent()
        )));
    }
    // reduction orders divide the cusp orders, and the relations reduce to
    // zero at both primes
    for phi in [phi_p, phi_q] {
        let op = phi.order_cp.to_i64().unwrap_or(i64::MAX);
        let oq = phi.order_cq.to_i64().unwrap_or(i64::MAX);
        if consts.cusp_order_p as i64 % op != 0 || consts.cusp_order_q as i64 % oq != 0 {
            return Err(ClassifyError::InconsistentConstants(format!(
                "reduction orders ({op}, {oq}) at {} do not divide the cusp orders",
                phi.prime
            )));
        }
        for &(a, b) in &consts.cusp_relations {
            if a % op != 0 || b % oq != 0 {
                // a * wp(c_p) + b * wp(c_q) must vanish; since at each prime
                // at most one of the two images is nonzero, divisibility per
                // coordinate is the exact condition
                return Err(ClassifyError::InconsistentConstants(format!(
                    "relation {a} c_p = {} c_q does not reduce to zero at {}",
                    -b, phi.prime
                )));
            }
        }
    }
    let _ = (p, q);
    Ok(())
}

/// All branch predictions for one candidate at one prime.
fn predictions_at(
    consts: &LevelConstants,
    cand: &KernelCandidate,
    phi: &PhiData,
    p: u64,
    q: u64,
) -> Vec<BranchPrediction> {
    let _ = (p, q);
    // constant parts: reduction order of the p-primary generator of C
    let mut fixed_h1 = 1u64;
    let mut fixed_h0 = 1u64;
    for part in cand.parts.iter().filter(|pt| pt.kind == PartKind::Constant) {
        let ell = part.prime;
        // the generator of C_ell: the cusp class whose order ell divides
        let (gen_order, image_order) = if consts.cusp_order_p % ell == 0 {
            (consts.cusp_order_p, &phi.order_cp)
        } else {
            assert!(
                consts.cusp_order_q % ell == 0,
                "no cusp class carries {ell}"
            );
            (consts.cusp_order_q, &phi.order_cq)
        };
        let k = BigInt::from(gen_order / ell);
        let o = image_order.clone();
        let h1 = (&o / o.gcd(&k)).to_u64().expect("small");
        assert!(
            h1 == 1 || h1 == ell,
            "C_{ell} image must be trivial or full"
        );
        fixed_h1 *= h1;
        fixed_h0 *= ell / h1;
    }
    let mu_parts: Vec<u64> = cand
        .parts
        .iter()
        .filter(|pt| pt.kind == PartKind::Mu)
        .map(|pt| pt.prime)
        .collect();
    let phi_odd = odd_part(&phi.group.order());
    let mut out = Vec::new();
    for mask in 0..(1u32 << mu_parts.len()) {
        let mut h1 = fixed_h1;
        let mut h0 = fixed_h0;
        let mut branches = Vec::new();
        for (i, &ell) in mu_parts.iter().enumerate() {
            let injects = (mask >> i) & 1 == 1;
            branches.push((ell, injects));
            if injects {
                h1 *= ell;
            } else {
                h0 *= ell;
            }
        }
        // predicted #Phi''_odd = #Phi_odd * h0 / h1
        let num = &phi_odd * BigInt::from(h0);
        let (pred, rem) = num.div_rem(&BigInt::from(h1));
        let predicted = if rem.is_zero() {
            pred
        } else {
            BigInt::from(-1)
        };
        out.push(BranchPrediction {
            mu_branches: branches,
            h0_odd: h0,
            h1_odd: h1,
            predicted_odd_order: predicted,
        });
    }
    out
}

fn odd_part(n: &BigInt) -> BigInt {
    let mut m = n.abs();
    let two = BigInt::from(2);
    while (&m % &two).is_zero() {
        m /= &two;
    }
    m
}

/// The full pipeline for one level: modular symbols, the Hecke order, the
/// Eisenstein ideal, component groups, obstruction checks and the kernel
/// classification.
pub fn run_level(
    consts: &LevelConstants,
    prime_bound: Option<u64>,
) -> Result<ClassificationCertificate, ClassifyError> {
    let space = build_space(consts.level).map_err(HeckeError::from)?;
    let order = crate::hecke::build_order(&space)?;
    let bound = prime_bound.unwrap_or(order.sturm_bound);
    let eis = eisenstein_ideal(&space, &order, bound)?;
    let (pp, qq) = phi_data(consts)?;
    let mut reports = Vec::new();
    for spec in &consts.obstructions {
        reports.push(obstruction_check(&space, &order, spec)?);
    }
    classify_kernel(consts, &eis, &pp, &qq, reports)
}

#[cfg(test)]
mod tests;
