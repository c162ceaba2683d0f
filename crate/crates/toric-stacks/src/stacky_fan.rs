//! Stacky fan representation, validation, barycentric coordinates, the q/r
//! decomposition, sector (Box) enumeration, and the residue map on valuation
//! data.
//!
//! A stacky fan is a triple (Σ, N, β): a simplicial fan Σ in N_ℚ, a finitely
//! generated abelian group N = ℤ^d ⊕ ∏ ℤ/ℓ_iℤ, and a map β with cofinite
//! image recorded through the ray images b_ρ ∈ ℤ^d. All fan combinatorics is
//! exact (rational arithmetic); validation never aborts, it reports
//! structured diagnostics with witnesses.

use crate::exact_math::{saturation, Int, IntMatrix, Rat, RationalMatrix};
use itertools::Itertools;
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

/// A ray of the fan: an identifier plus the image b_ρ of the corresponding
/// standard basis vector in N^rig = ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ray {
    pub id: String,
    pub b: Vec<Int>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FanError {
    #[error("rig_rank must be positive")]
    ZeroRank,
    #[error("torsion order {0} is < 2")]
    BadTorsionOrder(u32),
    #[error("duplicate ray id {0:?}")]
    DuplicateRayId(String),
    #[error("ray {id:?} has {got} coordinates, expected {expected}")]
    RayDimension { id: String, got: usize, expected: usize },
    #[error("cone {cone} references unknown ray id {id:?}")]
    UnknownRayId { cone: usize, id: String },
    #[error("cone {cone} lists ray {id:?} twice")]
    RepeatedRayInCone { cone: usize, id: String },
    #[error("fan has no maximal cones")]
    NoCones,
}

/// The combinatorial input: lattice rank, torsion orders, ray generators and
/// maximal cones. Immutable after construction; all queries are pure.
///
/// The torsion components of β (images of rays in the torsion part of N) are
/// accepted by the file format but ignored by every computation here: no
/// implemented formula (a_ρ, q, φ, heights) consumes them.
#[derive(Debug, Clone)]
pub struct StackyFan {
    rig_rank: usize,
    torsion_orders: Vec<u32>,
    rays: Vec<Ray>,
    /// Maximal cones as sorted lists of ray indices.
    max_cones: Vec<Vec<usize>>,
    /// Per-cone inverse of the matrix whose columns are the cone's rays (in
    /// cone order); `None` when the cone is not simplicial of full dimension.
    cone_inverses: Vec<Option<RationalMatrix>>,
}

/// One validation check with a pass/fail verdict and a human-readable
/// witness/detail string.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Structured validation report; one entry per fan invariant.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub checks: Vec<CheckResult>,
}

impl Diagnostics {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            let _ = writeln!(s, "{:24} {}  {}", c.name, verdict, c.detail);
        }
        s
    }
}

/// An element of Box(Σ) = Box^rig(Σ) × G^D: the rigid lattice part y, the
/// torsion tuple g, the fractional barycentric coordinates of y, and the age
/// Σ_ρ a_ρ(y).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub y: Vec<Int>,
    pub g: Vec<u32>,
    /// Per-ray coordinates a_ρ(y) ∈ [0,1), indexed like `fan.rays()`.
    pub coords: Vec<Rat>,
    pub age: Rat,
    pub untwisted: bool,
}

impl Sector {
    pub fn is_twisted(&self) -> bool {
        !self.untwisted
    }

    /// Stable identifier used for raised-vector indexing and display.
    pub fn label(&self) -> String {
        let ys: Vec<String> = self.y.iter().map(|v| v.to_string()).collect();
        let gs: Vec<String> = self.g.iter().map(|v| v.to_string()).collect();
        format!("y=({});g=({})", ys.join(","), gs.join(","))
    }
}

impl StackyFan {
    /// Build a fan from raw data. Only structural problems (bad ids,
    /// dimensions, torsion orders) are errors here; geometric invariants
    /// (simplicial, complete, face condition) are reported by [`validate`].
    ///
    /// [`validate`]: StackyFan::validate
    pub fn new(
        rig_rank: usize,
        torsion_orders: Vec<u32>,
        rays: Vec<Ray>,
        max_cones_by_id: Vec<Vec<String>>,
    ) -> Result<StackyFan, FanError> {
        if rig_rank == 0 {
            return Err(FanError::ZeroRank);
        }
        if let Some(&bad) = torsion_orders.iter().find(|&&l| l < 2) {
            return Err(FanError::BadTorsionOrder(bad));
        }
        let mut seen = BTreeSet::new();
        for r in &rays {
            if !seen.insert(r.id.clone()) {
                return Err(FanError::DuplicateRayId(r.id.clone()));
            }
            if r.b.len() != rig_rank {
                return Err(FanError::RayDimension {
                    id: r.id.clone(),
                    got: r.b.len(),
                    expected: rig_rank,
                });
            }
        }
        if max_cones_by_id.is_empty() {
            return Err(FanError::NoCones);
        }
        let mut max_cones = Vec::with_capacity(max_cones_by_id.len());
        for (ci, ids) in max_cones_by_id.iter().enumerate() {
            let mut cone = Vec::with_capacity(ids.len());
            for id in ids {
                let Some(ri) = rays.iter().position(|r| &r.id == id) else {
                    return Err(FanError::UnknownRayId {
                        cone: ci,
                        id: id.clone(),
                    });
                };
                if cone.contains(&ri) {
                    return Err(FanError::RepeatedRayInCone {
                        cone: ci,
                        id: id.clone(),
                    });
                }
                cone.push(ri);
            }
            cone.sort_unstable();
            max_cones.push(cone);
        }
        let cone_inverses = max_cones
            .iter()
            .map(|cone| {
                if cone.len() != rig_rank {
                    return None;
                }
                let mut m = RationalMatrix::zero(rig_rank, rig_rank);
                for (j, &ri) in cone.iter().enumerate() {
                    for i in 0..rig_rank {
                        m[(i, j)] = Rat::from_integer(rays[ri].b[i].clone());
                    }
                }
                m.inverse().ok()
            })
            .collect();
        Ok(StackyFan {
            rig_rank,
            torsion_orders,
            rays,
            max_cones,
            cone_inverses,
        })
    }

    pub fn rig_rank(&self) -> usize {
        self.rig_rank
    }

    pub fn torsion_orders(&self) -> &[u32] {
        &self.torsion_orders
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn ray_index(&self, id: &str) -> Option<usize> {
        self.rays.iter().position(|r| r.id == id)
    }

    /// Order of G^D = ∏ ℤ/ℓ_iℤ.
    pub fn gd_order(&self) -> u64 {
        self.torsion_orders.iter().map(|&l| l as u64).product()
    }

    /// Number of torsion orders ℓ_i that are even (units contribute a factor
    /// 2 per even order over ℚ).
    pub fn even_torsion_count(&self) -> usize {
        self.torsion_orders.iter().filter(|&&l| l % 2 == 0).count()
    }

    /// Exact inverse of the cone's ray matrix, if the cone is simplicial of
    /// full dimension.
    pub fn cone_inverse(&self, cone: usize) -> Option<&RationalMatrix> {
        self.cone_inverses[cone].as_ref()
    }

    /// Coordinates of `y` in cone `cone` if `y` lies in it (all coordinates
    /// ≥ 0), in cone-ray order.
    pub fn cone_coords(&self, cone: usize, y: &[Rat]) -> Option<Vec<Rat>> {
        let inv = self.cone_inverses[cone].as_ref()?;
        let a = inv.mul_vec(y);
        if a.iter().all(|v| !v.is_negative()) {
            Some(a)
        } else {
            None
        }
    }

    /// Some maximal cone containing `y`, with coordinates.
    pub fn containing_cone(&self, y: &[Rat]) -> Option<(usize, Vec<Rat>)> {
        (0..self.max_cones.len()).find_map(|c| self.cone_coords(c, y).map(|a| (c, a)))
    }

    /// Barycentric coordinates a_ρ(y) as a per-ray vector (indexed like
    /// [`rays`](StackyFan::rays)): the coordinates of y in a cone containing
    /// it, zero on all other rays.
    ///
    /// When y lies on a face shared by several cones the values on the
    /// common support agree across cones, so the answer is independent of
    /// which containing cone is found; effectively this returns coordinates
    /// with respect to the minimal cone containing y.
    pub fn barycentric(&self, y: &[Int]) -> Vec<Rat> {
        let yq: Vec<Rat> = y.iter().map(|v| Rat::from_integer(v.clone())).collect();
        self.barycentric_rational(&yq)
    }

    /// [`barycentric`](StackyFan::barycentric) for rational y.
    pub fn barycentric_rational(&self, y: &[Rat]) -> Vec<Rat> {
        let (cone, a) = self
            .containing_cone(y)
            .expect("complete fan covers every vector");
        let mut out = vec![Rat::zero(); self.rays.len()];
        for (k, &ri) in self.max_cones[cone].iter().enumerate() {
            out[ri] = a[k].clone();
        }
        out
    }

    /// The q/r decomposition: q = Σ_ρ {a_ρ(y)}·b_ρ ∈ Box^rig(Σ) and
    /// r = Σ_ρ ⌊a_ρ(y)⌋·b_ρ, with y = q + r and r a nonnegative integer
    /// combination of the rays of the cone containing y.
    pub fn split_qr(&self, y: &[Int]) -> (Vec<Int>, Vec<Int>) {
        let a = self.barycentric(y);
        let mut r = vec![Int::zero(); self.rig_rank];
        for (ri, ar) in a.iter().enumerate() {
            let fl = ar.floor().to_integer();
            if !fl.is_zero() {
                for j in 0..self.rig_rank {
                    r[j] += &fl * &self.rays[ri].b[j];
                }
            }
        }
        let q: Vec<Int> = y.iter().zip(&r).map(|(yj, rj)| yj - rj).collect();
        (q, r)
    }

    /// Integer points of the half-open parallelepiped
    /// { Σ_{ρ∈σ} a_ρ b_ρ : a_ρ ∈ [0,1) } of one cone.
    fn box_rig_of_cone(&self, cone: usize) -> Vec<Vec<Int>> {
        let Some(inv) = self.cone_inverses[cone].as_ref() else {
            return Vec::new();
        };
        let d = self.rig_rank;
        let cone_rays = &self.max_cones[cone];
        // Bounding box of the parallelepiped per coordinate.
        let mut lo = vec![Int::zero(); d];
        let mut hi = vec![Int::zero(); d];
        for &ri in cone_rays {
            for j in 0..d {
                let b = &self.rays[ri].b[j];
                if b.is_negative() {
                    lo[j] += b;
                } else {
                    hi[j] += b;
                }
            }
        }
        let mut out = Vec::new();
        let mut y: Vec<Int> = lo.clone();
        'outer: loop {
            let yq: Vec<Rat> = y.iter().map(|v| Rat::from_integer(v.clone())).collect();
            let a = inv.mul_vec(&yq);
            if a
                .iter()
                .all(|v| !v.is_negative() && v < &Rat::one())
            {
                out.push(y.clone());
            }
            // Odometer over the integer box.
            for j in 0..d {
                if y[j] < hi[j] {
                    y[j] += 1;
                    continue 'outer;
                }
                y[j] = lo[j].clone();
            }
            break;
        }
        out
    }

    /// Complete enumeration of Box(Σ) = Box^rig(Σ) × G^D with coordinates
    /// and ages. Exactly one sector is untwisted; the untwisted sector comes
    /// first, the rest are sorted by (y, g).
    pub fn sectors(&self) -> Vec<Sector> {
        let mut rig: BTreeSet<Vec<Int>> = BTreeSet::new();
        for c in 0..self.max_cones.len() {
            rig.extend(self.box_rig_of_cone(c));
        }
        let mut torsion_tuples = vec![vec![]];
        for &l in &self.torsion_orders {
            torsion_tuples = torsion_tuples
                .into_iter()
                .flat_map(|t: Vec<u32>| {
                    (0..l).map(move |g| {
                        let mut t2 = t.clone();
                        t2.push(g);
                        t2
                    })
                })
                .collect();
        }
        let mut sectors = Vec::new();
        for y in &rig {
            let coords = self.barycentric(y);
            let age: Rat = coords.iter().fold(Rat::zero(), |acc, v| acc + v);
            for g in &torsion_tuples {
                let untwisted = y.iter().all(Zero::is_zero) && g.iter().all(|&v| v == 0);
                sectors.push(Sector {
                    y: y.clone(),
                    g: g.clone(),
                    coords: coords.clone(),
                    age: age.clone(),
                    untwisted,
                });
            }
        }
        sectors.sort_by(|a, b| {
            b.untwisted
                .cmp(&a.untwisted)
                .then_with(|| a.y.cmp(&b.y))
                .then_with(|| a.g.cmp(&b.g))
        });
        sectors
    }

    /// Twisted sectors only, in the same order as [`sectors`](StackyFan::sectors).
    pub fn twisted_sectors(&self) -> Vec<Sector> {
        self.sectors().into_iter().filter(Sector::is_twisted).collect()
    }

    /// The residue map on valuation data: (y, g) ↦ the sector
    /// (q(y), g) ∈ Box(Σ).
    pub fn sector_of_valuation(&self, y: &[Int], g: &[u32]) -> Sector {
        assert_eq!(g.len(), self.torsion_orders.len());
        let (q, _) = self.split_qr(y);
        let coords = self.barycentric(&q);
        let age: Rat = coords.iter().fold(Rat::zero(), |acc, v| acc + v);
        let untwisted = q.iter().all(Zero::is_zero) && g.iter().all(|&v| v == 0);
        Sector {
            y: q,
            g: g.to_vec(),
            coords,
            age,
            untwisted,
        }
    }

    /// Validation report: simpliciality, cofinite image, completeness and
    /// the face-intersection condition, each with a witness on failure.
    pub fn validate(&self) -> Diagnostics {
        let mut checks = Vec::new();

        // Simpliciality: every maximal cone has exactly d rays, linearly
        // independent over ℚ.
        let mut simp_fail = None;
        for (ci, cone) in self.max_cones.iter().enumerate() {
            if cone.len() != self.rig_rank || self.cone_inverses[ci].is_none() {
                simp_fail = Some(format!(
                    "cone {} (rays {}) is not simplicial of full dimension {}",
                    ci,
                    self.cone_ids(ci),
                    self.rig_rank
                ));
                break;
            }
        }
        checks.push(CheckResult {
            name: "simplicial",
            pass: simp_fail.is_none(),
            detail: simp_fail.unwrap_or_else(|| {
                format!("{} maximal cones, all simplicial", self.max_cones.len())
            }),
        });

        // Cofinite image: the b_ρ span ℚ^d.
        let ray_matrix = IntMatrix::from_rows(
            &self.rays.iter().map(|r| r.b.clone()).collect::<Vec<_>>(),
        );
        let span_rank = ray_matrix.rank();
        if span_rank < self.rig_rank {
            // Any nonzero vector orthogonal to all rays is not in the span,
            // hence an uncovered direction too.
            let witness = ray_matrix
                .kernel()
                .into_iter()
                .next()
                .map(|v| format!("{v:?}"))
                .unwrap_or_default();
            checks.push(CheckResult {
                name: "cofinite_image",
                pass: false,
                detail: format!(
                    "rays span rank {} < {}; direction {} is uncovered",
                    span_rank, self.rig_rank, witness
                ),
            });
        } else {
            checks.push(CheckResult {
                name: "cofinite_image",
                pass: true,
                detail: format!("rays span ℚ^{}", self.rig_rank),
            });
        }

        // The remaining geometric checks need simplicial full-dim cones.
        if simp_fail_blocks(&checks) {
            checks.push(CheckResult {
                name: "complete",
                pass: false,
                detail: "skipped: fan is not simplicial".into(),
            });
            checks.push(CheckResult {
                name: "face_intersections",
                pass: false,
                detail: "skipped: fan is not simplicial".into(),
            });
            return Diagnostics { checks };
        }

        checks.push(self.check_complete());
        checks.push(self.check_faces());
        Diagnostics { checks }
    }

    fn cone_ids(&self, ci: usize) -> String {
        self.max_cones[ci]
            .iter()
            .map(|&ri| self.rays[ri].id.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Completeness via facet pairing: every facet (ridge) of every maximal
    /// cone must be contained in exactly two maximal cones, with the two
    /// opposite rays strictly on opposite sides of the facet hyperplane.
    /// Together with the face condition this forces the cones to tile ℝ^d;
    /// an explicit uncovered direction is reported on failure.
    fn check_complete(&self) -> CheckResult {
        let d = self.rig_rank;
        if d == 1 {
            let mut pos = 0usize;
            let mut neg = 0usize;
            for cone in &self.max_cones {
                let b = &self.rays[cone[0]].b[0];
                if b.is_positive() {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
            if pos >= 1 && neg >= 1 {
                return CheckResult {
                    name: "complete",
                    pass: true,
                    detail: "both half-lines covered".into(),
                };
            }
            let dir = if pos == 0 { "1" } else { "-1" };
            return CheckResult {
                name: "complete",
                pass: false,
                detail: format!("direction {dir} is uncovered"),
            };
        }
        for (ci, cone) in self.max_cones.iter().enumerate() {
            for drop in 0..cone.len() {
                let facet: Vec<usize> = cone
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &ri)| ri)
                    .collect();
                let neighbors: Vec<usize> = self
                    .max_cones
                    .iter()
                    .enumerate()
                    .filter(|(_, other)| facet.iter().all(|ri| other.contains(ri)))
                    .map(|(cj, _)| cj)
                    .collect();
                if neighbors.len() != 2 {
                    let witness = self
                        .uncovered_beyond_facet(ci, &facet, cone[drop])
                        .map(|w| format!("; direction {w:?} is uncovered"))
                        .unwrap_or_default();
                    return CheckResult {
                        name: "complete",
                        pass: false,
                        detail: format!(
                            "facet {{{}}} of cone {} lies in {} maximal cone(s), expected 2{}",
                            facet
                                .iter()
                                .map(|&ri| self.rays[ri].id.as_str())
                                .collect::<Vec<_>>()
                                .join(","),
                            ci,
                            neighbors.len(),
                            witness
                        ),
                    };
                }
                let cj = neighbors.into_iter().find(|&c| c != ci).unwrap();
                let opp = *self.max_cones[cj]
                    .iter()
                    .find(|ri| !facet.contains(ri))
                    .unwrap();
                // Opposite rays must be on strictly opposite sides of the
                // facet hyperplane.
                let s1 = self.facet_side(&facet, cone[drop]);
                let s2 = self.facet_side(&facet, opp);
                if s1 * s2 >= 0 {
                    return CheckResult {
                        name: "complete",
                        pass: false,
                        detail: format!(
                            "cones {} and {} lie on the same side of their shared facet {{{}}}",
                            ci,
                            cj,
                            facet
                                .iter()
                                .map(|&ri| self.rays[ri].id.as_str())
                                .collect::<Vec<_>>()
                                .join(",")
                        ),
                    };
                }
            }
        }
        // Facet pairing gives a covering of some constant degree k ≥ 1; pin
        // k = 1 by checking that a generic direction lies in exactly one
        // cone.
        match self.generic_cover_count() {
            1 => CheckResult {
                name: "complete",
                pass: true,
                detail: "all facets paired; generic direction covered once".into(),
            },
            k => CheckResult {
                name: "complete",
                pass: false,
                detail: format!("generic direction covered by {k} cones (fan wraps ℝ^d {k} times)"),
            },
        }
    }

    /// Sign of the facet hyperplane functional at ray `ray`.
    fn facet_side(&self, facet: &[usize], ray: usize) -> i32 {
        let rows: Vec<Vec<Int>> = facet.iter().map(|&ri| self.rays[ri].b.clone()).collect();
        let normal = IntMatrix::from_rows(&rows)
            .kernel()
            .into_iter()
            .next()
            .expect("facet of a simplicial cone has a normal");
        let v: Int = normal
            .iter()
            .zip(&self.rays[ray].b)
            .map(|(u, b)| u * b)
            .sum();
        match v.cmp(&Int::zero()) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        }
    }

    /// Try to exhibit an uncovered integer direction just beyond an unpaired
    /// facet of cone `ci` (across from ray `opposite`).
    fn uncovered_beyond_facet(
        &self,
        _ci: usize,
        facet: &[usize],
        opposite: usize,
    ) -> Option<Vec<Int>> {
        // Interior point of the facet, pushed slightly to the far side of
        // the opposite ray, cleared to integers.
        let scale = Int::from(4096);
        let mut w = vec![Int::zero(); self.rig_rank];
        for &ri in facet {
            for j in 0..self.rig_rank {
                w[j] += &scale * &self.rays[ri].b[j];
            }
        }
        for j in 0..self.rig_rank {
            w[j] -= &self.rays[opposite].b[j];
        }
        let wq: Vec<Rat> = w.iter().map(|v| Rat::from_integer(v.clone())).collect();
        if self.containing_cone(&wq).is_none() {
            Some(w)
        } else {
            None
        }
    }

    /// Number of maximal cones containing a fixed generic direction
    /// (re-drawn deterministically until it avoids all facet hyperplanes).
    fn generic_cover_count(&self) -> usize {
        // Deterministic "random" integer directions.
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2001) as i64 - 1000
        };
        'draw: for _ in 0..64 {
            let y: Vec<Rat> = (0..self.rig_rank)
                .map(|_| Rat::from_integer(Int::from(next())))
                .collect();
            let mut count = 0;
            for c in 0..self.max_cones.len() {
                if let Some(a) = self.cone_coords(c, &y) {
                    if a.iter().any(Zero::is_zero) {
                        continue 'draw; // on a boundary; not generic
                    }
                    count += 1;
                }
            }
            if count > 0 {
                return count;
            }
            // count == 0 is a legitimate answer (hole in the fan) as long as
            // the direction is generic, which we ensured above only for
            // covered cones; accept it.
            return 0;
        }
        0
    }

    /// Pairwise face condition: for every two distinct maximal cones σ, τ
    /// with common rays R, there must exist a linear functional vanishing on
    /// R, strictly positive on σ's other rays and strictly negative on τ's —
    /// then σ ∩ τ = cone(R) is a common face.
    fn check_faces(&self) -> CheckResult {
        for ci in 0..self.max_cones.len() {
            for cj in ci + 1..self.max_cones.len() {
                let a = &self.max_cones[ci];
                let b = &self.max_cones[cj];
                if a == b {
                    return CheckResult {
                        name: "face_intersections",
                        pass: false,
                        detail: format!("cones {ci} and {cj} are identical"),
                    };
                }
                let common: Vec<usize> =
                    a.iter().copied().filter(|ri| b.contains(ri)).collect();
                let eq: Vec<Vec<Int>> =
                    common.iter().map(|&ri| self.rays[ri].b.clone()).collect();
                let mut pos: Vec<Vec<Int>> = Vec::new();
                for &ri in a.iter().filter(|ri| !common.contains(ri)) {
                    pos.push(self.rays[ri].b.clone());
                }
                for &ri in b.iter().filter(|ri| !common.contains(ri)) {
                    pos.push(self.rays[ri].b.iter().map(|v| -v).collect());
                }
                if !separating_functional_exists(&eq, &pos, self.rig_rank) {
                    return CheckResult {
                        name: "face_intersections",
                        pass: false,
                        detail: format!(
                            "cones {ci} ({}) and {cj} ({}) do not meet in a common face",
                            self.cone_ids(ci),
                            self.cone_ids(cj)
                        ),
                    };
                }
            }
        }
        CheckResult {
            name: "face_intersections",
            pass: true,
            detail: "all pairs meet in common faces".into(),
        }
    }
}

fn simp_fail_blocks(checks: &[CheckResult]) -> bool {
    checks.iter().any(|c| c.name == "simplicial" && !c.pass)
}

/// Does there exist u ∈ ℚ^d with ⟨u, e⟩ = 0 for all e ∈ `eq` and
/// ⟨u, c⟩ > 0 for all c ∈ `pos`?
///
/// Reduce to the subspace V = eq^⊥ and apply Gordan's theorem there: the
/// open cone {w : ⟨w, c'⟩ > 0} is nonempty iff there is no nonzero
/// nonnegative combination Σ λ_i c'_i = 0. Minimal positive dependencies
/// have a one-dimensional kernel, so subset enumeration suffices (all
/// instances here have ≤ 2d vectors in dimension ≤ d ≤ 3).
fn separating_functional_exists(eq: &[Vec<Int>], pos: &[Vec<Int>], dim: usize) -> bool {
    if pos.is_empty() {
        return true;
    }
    // Basis of V = eq^⊥ (rows).
    let basis: Vec<Vec<Int>> = if eq.is_empty() {
        (0..dim)
            .map(|i| {
                let mut e = vec![Int::zero(); dim];
                e[i] = Int::one();
                e
            })
            .collect()
    } else {
        IntMatrix::from_rows(eq).kernel()
    };
    if basis.is_empty() {
        return false; // eq spans everything; cannot be positive anywhere
    }
    // Project: c'_i = (⟨basis_k, c_i⟩)_k.
    let proj: Vec<Vec<Int>> = pos
        .iter()
        .map(|c| {
            basis
                .iter()
                .map(|bk| bk.iter().zip(c).map(|(u, v)| u * v).sum())
                .collect()
        })
        .collect();
    if proj.iter().any(|c| c.iter().all(Zero::is_zero)) {
        return false; // some strict constraint lies in span(eq)
    }
    let m = basis.len();
    let n = proj.len();
    // Search for a minimal positive dependency among the projected vectors.
    // A minimal positively-dependent set has a one-dimensional kernel with a
    // sign-definite generator, and size at most m + 1 by Carathéodory.
    for size in 2..=((m + 1).min(n)) {
        for idx in (0..n).combinations(size) {
            let cols: Vec<Vec<Int>> = idx.iter().map(|&i| proj[i].clone()).collect();
            // Kernel of the m×size matrix with these columns.
            let ker = IntMatrix::from_rows(&cols).transpose().kernel();
            if ker.len() == 1 {
                let k = &ker[0];
                if k.iter().all(|v| v.is_positive()) || k.iter().all(|v| v.is_negative()) {
                    return false; // positive dependency ⇒ no separating u
                }
            }
        }
    }
    true
}

/// Convenience builders for the bundled reference fans (used widely in
/// tests).
pub mod known_fans {
    use super::*;

    fn ray(id: &str, b: &[i64]) -> Ray {
        Ray {
            id: id.into(),
            b: b.iter().map(|&v| Int::from(v)).collect(),
        }
    }

    /// ℙ¹: rays ±1, no torsion.
    pub fn p1() -> StackyFan {
        StackyFan::new(
            1,
            vec![],
            vec![ray("plus", &[1]), ray("minus", &[-1])],
            vec![vec!["plus".into()], vec!["minus".into()]],
        )
        .unwrap()
    }

    /// ℙ(1,2): rays 1 and −2.
    pub fn p12() -> StackyFan {
        StackyFan::new(
            1,
            vec![],
            vec![ray("plus", &[1]), ray("minus", &[-2])],
            vec![vec!["plus".into()], vec!["minus".into()]],
        )
        .unwrap()
    }

    /// ℙ(2,3): rays 2 and −3.
    pub fn p23() -> StackyFan {
        StackyFan::new(
            1,
            vec![],
            vec![ray("plus", &[2]), ray("minus", &[-3])],
            vec![vec!["plus".into()], vec!["minus".into()]],
        )
        .unwrap()
    }

    /// ℙ²: rays e₁, e₂, −e₁−e₂.
    pub fn p2() -> StackyFan {
        StackyFan::new(
            2,
            vec![],
            vec![ray("e1", &[1, 0]), ray("e2", &[0, 1]), ray("f", &[-1, -1])],
            vec![
                vec!["e1".into(), "e2".into()],
                vec!["e2".into(), "f".into()],
                vec!["f".into(), "e1".into()],
            ],
        )
        .unwrap()
    }

    /// ℙ¹ × Bμ₂: rays ±1, torsion orders (2).
    pub fn p1xbmu2() -> StackyFan {
        StackyFan::new(
            1,
            vec![2],
            vec![ray("plus", &[1]), ray("minus", &[-1])],
            vec![vec!["plus".into()], vec!["minus".into()]],
        )
        .unwrap()
    }
}

/// Saturation of the lattice generated by the ray vectors (used by callers
/// needing the rigid sublattice they span).
pub fn ray_span_saturation(fan: &StackyFan) -> Vec<Vec<Int>> {
    let rows: Vec<Vec<Int>> = fan.rays().iter().map(|r| r.b.clone()).collect();
    saturation(&rows, fan.rig_rank())
}

#[cfg(test)]
mod tests {
    use super::known_fans::*;
    use super::*;
    use crate::exact_math::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn p1_validates() {
        let d = p1().validate();
        assert!(d.all_pass(), "{}", d.summary());
    }

    #[test]
    fn p2_validates() {
        let d = p2().validate();
        assert!(d.all_pass(), "{}", d.summary());
    }

    #[test]
    fn half_line_fan_is_incomplete() {
        let fan = StackyFan::new(
            1,
            vec![],
            vec![Ray {
                id: "plus".into(),
                b: ints(&[1]),
            }],
            vec![vec!["plus".into()]],
        )
        .unwrap();
        let d = fan.validate();
        assert!(!d.all_pass());
        let c = d.checks.iter().find(|c| c.name == "complete").unwrap();
        assert!(!c.pass);
        assert!(c.detail.contains("-1"), "witness missing: {}", c.detail);
    }

    #[test]
    fn non_simplicial_cone_fails() {
        let fan = StackyFan::new(
            2,
            vec![],
            vec![
                Ray {
                    id: "a".into(),
                    b: ints(&[1, 0]),
                },
                Ray {
                    id: "b".into(),
                    b: ints(&[0, 1]),
                },
                Ray {
                    id: "c".into(),
                    b: ints(&[1, 1]),
                },
            ],
            vec![vec!["a".into(), "b".into(), "c".into()]],
        )
        .unwrap();
        let d = fan.validate();
        let c = d.checks.iter().find(|c| c.name == "simplicial").unwrap();
        assert!(!c.pass);
    }

    #[test]
    fn overlapping_cones_fail_face_condition() {
        // Two 2-d cones overlapping in dimension 2 but not sharing rays.
        let fan = StackyFan::new(
            2,
            vec![],
            vec![
                Ray {
                    id: "a".into(),
                    b: ints(&[1, 0]),
                },
                Ray {
                    id: "b".into(),
                    b: ints(&[0, 1]),
                },
                Ray {
                    id: "c".into(),
                    b: ints(&[1, 1]),
                },
                Ray {
                    id: "d".into(),
                    b: ints(&[-1, 1]),
                },
            ],
            vec![
                vec!["a".into(), "b".into()],
                vec!["c".into(), "d".into()],
            ],
        )
        .unwrap();
        let d = fan.validate();
        let c = d
            .checks
            .iter()
            .find(|c| c.name == "face_intersections")
            .unwrap();
        assert!(!c.pass, "{}", d.summary());
    }

    #[test]
    fn barycentric_p12() {
        let fan = p12();
        let a = fan.barycentric(&ints(&[5]));
        assert_eq!(a, vec![ratio(5, 1), ratio(0, 1)]);
        let a = fan.barycentric(&ints(&[-3]));
        assert_eq!(a, vec![ratio(0, 1), ratio(3, 2)]);
    }

    #[test]
    fn barycentric_p2() {
        let fan = p2();
        let a = fan.barycentric(&ints(&[-1, -2]));
        // y = 1·e₂ + ... solve: (−1,−2) = α·f + β·e? Expected {f: 2, e1: 1}
        // is wrong way round; recompute: 2·(−1,−1) + 1·(1,0) = (−1,−2). ✓
        let f = fan.ray_index("f").unwrap();
        let e1 = fan.ray_index("e1").unwrap();
        let e2 = fan.ray_index("e2").unwrap();
        assert_eq!(a[f], ratio(2, 1));
        assert_eq!(a[e1], ratio(1, 1));
        assert_eq!(a[e2], ratio(0, 1));
    }

    #[test]
    fn split_qr_p12() {
        let fan = p12();
        let (q, r) = fan.split_qr(&ints(&[-3]));
        assert_eq!(q, ints(&[-1]));
        assert_eq!(r, ints(&[-2]));
        let (q, r) = fan.split_qr(&ints(&[0]));
        assert_eq!(q, ints(&[0]));
        assert_eq!(r, ints(&[0]));
        let (q, r) = fan.split_qr(&ints(&[4]));
        assert_eq!(q, ints(&[0]));
        assert_eq!(r, ints(&[4]));
    }

    #[test]
    fn sectors_p1() {
        let s = p1().sectors();
        assert_eq!(s.len(), 1);
        assert!(s[0].untwisted);
        assert!(s[0].age.is_zero());
    }

    #[test]
    fn sectors_p12() {
        let s = p12().sectors();
        assert_eq!(s.len(), 2);
        assert!(s[0].untwisted);
        assert_eq!(s[1].y, ints(&[-1]));
        assert_eq!(s[1].age, ratio(1, 2));
    }

    #[test]
    fn sectors_p23() {
        let s = p23().sectors();
        // Untwisted plus y = 1 (a = 1/2 on the ray 2), y = −1 (a = 1/3),
        // y = −2 (a = 2/3).
        assert_eq!(s.len(), 4);
        let ages: Vec<(Vec<Int>, Rat)> = s
            .iter()
            .filter(|x| x.is_twisted())
            .map(|x| (x.y.clone(), x.age.clone()))
            .collect();
        assert!(ages.contains(&(ints(&[1]), ratio(1, 2))));
        assert!(ages.contains(&(ints(&[-1]), ratio(1, 3))));
        assert!(ages.contains(&(ints(&[-2]), ratio(2, 3))));
    }

    #[test]
    fn sectors_p1xbmu2() {
        let s = p1xbmu2().sectors();
        assert_eq!(s.len(), 2);
        assert!(s[0].untwisted);
        assert_eq!(s[1].y, ints(&[0]));
        assert_eq!(s[1].g, vec![1]);
        assert!(s[1].age.is_zero());
        assert!(s[1].is_twisted());
    }

    #[test]
    fn sectors_p2_trivial_box() {
        let s = p2().sectors();
        assert_eq!(s.len(), 1);
        assert!(s[0].untwisted);
    }

    #[test]
    fn sector_count_is_box_times_gd() {
        let fan = StackyFan::new(
            1,
            vec![2, 3],
            vec![
                Ray {
                    id: "p".into(),
                    b: ints(&[1]),
                },
                Ray {
                    id: "m".into(),
                    b: ints(&[-2]),
                },
            ],
            vec![vec!["p".into()], vec!["m".into()]],
        )
        .unwrap();
        // Box^rig has 2 elements, G^D has 6.
        assert_eq!(fan.sectors().len(), 12);
    }

    #[test]
    fn sector_of_valuation_p12() {
        let fan = p12();
        let s = fan.sector_of_valuation(&ints(&[-3]), &[]);
        assert_eq!(s.y, ints(&[-1]));
        assert!(s.is_twisted());
        let s = fan.sector_of_valuation(&ints(&[0]), &[]);
        assert!(s.untwisted);
    }

    #[test]
    fn sector_of_valuation_p1xbmu2() {
        let fan = p1xbmu2();
        let s = fan.sector_of_valuation(&ints(&[1]), &[1]);
        assert_eq!(s.y, ints(&[0]));
        assert_eq!(s.g, vec![1]);
        assert!(s.is_twisted());
    }

    #[test]
    fn barycentric_agrees_on_shared_faces() {
        // In ℙ², the origin and ray directions lie on shared faces; all
        // containing cones must give the same support values.
        let fan = p2();
        for y in [ints(&[0, 0]), ints(&[1, 0]), ints(&[0, 3]), ints(&[-2, -2])] {
            let yq: Vec<Rat> = y.iter().map(|v| Rat::from_integer(v.clone())).collect();
            let mut supports: Vec<Vec<(usize, Rat)>> = Vec::new();
            for c in 0..fan.max_cones().len() {
                if let Some(a) = fan.cone_coords(c, &yq) {
                    let mut sup: Vec<(usize, Rat)> = fan.max_cones()[c]
                        .iter()
                        .zip(&a)
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(&ri, v)| (ri, v.clone()))
                        .collect();
                    sup.sort_by_key(|(ri, _)| *ri);
                    supports.push(sup);
                }
            }
            assert!(!supports.is_empty());
            assert!(
                supports.windows(2).all(|w| w[0] == w[1]),
                "containing cones disagree at {y:?}: {supports:?}"
            );
        }
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            StackyFan::new(0, vec![], vec![], vec![]).unwrap_err(),
            FanError::ZeroRank
        );
        assert_eq!(
            StackyFan::new(
                1,
                vec![1],
                vec![Ray {
                    id: "p".into(),
                    b: ints(&[1])
                }],
                vec![vec!["p".into()]]
            )
            .unwrap_err(),
            FanError::BadTorsionOrder(1)
        );
    }
}
