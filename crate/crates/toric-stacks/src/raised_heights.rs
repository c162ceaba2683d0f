//! Raised vectors, the linear forms Ξ, the cone Λ, the anti-canonical raised
//! vector, the pairings φ and φ^∞, and local/global heights of rational
//! torus points over ℚ.
//!
//! A raised vector assigns a rational coefficient to every ray and every
//! twisted sector of a fixed fan. Heights are computed in exact
//! prime-exponent form and converted to floats once, at comparison time;
//! callers that need boundary exactness (the counting module) work with the
//! exact exponents directly.

use crate::exact_math::{Int, Rat};
use crate::primes::factorize;
use crate::stacky_fan::{Sector, StackyFan};
use num::{Signed, ToPrimitive, Zero};

/// A coefficient per ray and per twisted sector of one fan. `ray[i]`
/// corresponds to `fan.rays()[i]`; `sector[j]` to `fan.twisted_sectors()[j]`
/// (whose order is deterministic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaisedVector {
    pub ray: Vec<Rat>,
    pub sector: Vec<Rat>,
}

impl RaisedVector {
    pub fn zero(fan: &StackyFan) -> Self {
        RaisedVector {
            ray: vec![Rat::zero(); fan.rays().len()],
            sector: vec![Rat::zero(); fan.twisted_sectors().len()],
        }
    }

    pub fn scale(&self, t: &Rat) -> Self {
        RaisedVector {
            ray: self.ray.iter().map(|v| v * t).collect(),
            sector: self.sector.iter().map(|v| v * t).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        RaisedVector {
            ray: self.ray.iter().zip(&other.ray).map(|(a, b)| a + b).collect(),
            sector: self
                .sector
                .iter()
                .zip(&other.sector)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rat::from_integer(1.into())))
    }
}

/// The anti-canonical raised vector −K_X: entry 1 at each ray, entry
/// 1 − age(Y) at each twisted sector.
pub fn anticanonical(fan: &StackyFan) -> RaisedVector {
    RaisedVector {
        ray: vec![num::One::one(); fan.rays().len()],
        sector: fan
            .twisted_sectors()
            .iter()
            .map(|y| Rat::from_integer(1.into()) - &y.age)
            .collect(),
    }
}

/// Ξ_ρ(s) = s_ρ for a ray index.
pub fn xi_ray(s: &RaisedVector, ray: usize) -> Rat {
    s.ray[ray].clone()
}

/// Ξ_Y(s) = s_Y + Σ_ρ a_ρ(Y)·s_ρ for the twisted sector with index
/// `sector_index` (into `fan.twisted_sectors()`) and coordinates `coords`.
pub fn xi_sector(s: &RaisedVector, sector_index: usize, coords: &[Rat]) -> Rat {
    let mut v = s.sector[sector_index].clone();
    for (a, sr) in coords.iter().zip(&s.ray) {
        if !a.is_zero() {
            v += a * sr;
        }
    }
    v
}

/// All Ξ values of `s`: one per ray followed by one per twisted sector, in
/// the canonical orders.
pub fn xi_all(fan: &StackyFan, s: &RaisedVector) -> Vec<Rat> {
    let twisted = fan.twisted_sectors();
    let mut out: Vec<Rat> = s.ray.clone();
    for (j, y) in twisted.iter().enumerate() {
        out.push(xi_sector(s, j, &y.coords));
    }
    out
}

/// Membership of s in the cone Λ = {Ξ_ρ ≥ 0 for all ρ ∈ Σ(1) ∪ twisted}
/// (strict inequalities for the interior Λ°).
pub fn lambda_contains(fan: &StackyFan, s: &RaisedVector, interior: bool) -> bool {
    xi_all(fan, s).iter().all(|v| {
        if interior {
            v.is_positive()
        } else {
            !v.is_negative()
        }
    })
}

/// The embedding of m ∈ M^rig = Hom(N^rig, ℤ) as a raised vector:
/// ray entries ⟨b_ρ, m⟩, sector entries 0.
pub fn embed_mrig(fan: &StackyFan, m: &[Int]) -> RaisedVector {
    assert_eq!(m.len(), fan.rig_rank());
    RaisedVector {
        ray: fan
            .rays()
            .iter()
            .map(|r| Rat::from_integer(r.b.iter().zip(m).map(|(b, mi)| b * mi).sum()))
            .collect(),
        sector: vec![Rat::zero(); fan.twisted_sectors().len()],
    }
}

/// Index of the sector with data (y, g) in the twisted-sector list, or
/// `None` for the untwisted sector.
pub fn twisted_index(twisted: &[Sector], y: &[Int], g: &[u32]) -> Option<usize> {
    twisted.iter().position(|t| t.y == y && t.g == g)
}

/// The pairing φ_s(y, g): s_{q(y,g)} + Σ_ρ a_ρ(y)·s_ρ when the sector
/// q(y,g) is twisted; Σ_ρ a_ρ(y)·s_ρ otherwise.
pub fn phi(fan: &StackyFan, s: &RaisedVector, y: &[Int], g: &[u32]) -> Rat {
    phi_with_twisted(fan, &fan.twisted_sectors(), s, y, g)
}

/// [`phi`] with a precomputed twisted-sector list (hot-loop variant).
pub fn phi_with_twisted(
    fan: &StackyFan,
    twisted: &[Sector],
    s: &RaisedVector,
    y: &[Int],
    g: &[u32],
) -> Rat {
    let a = fan.barycentric(y);
    let mut v = Rat::zero();
    for (ar, sr) in a.iter().zip(&s.ray) {
        if !ar.is_zero() {
            v += ar * sr;
        }
    }
    let sec = fan.sector_of_valuation(y, g);
    if sec.is_twisted() {
        let idx = twisted_index(twisted, &sec.y, &sec.g)
            .expect("sector of valuation data is in Box(Σ)");
        v += &s.sector[idx];
    }
    v
}

/// Exact linear form of φ^∞ restricted to each maximal cone: coefficient
/// vectors c_σ with φ^∞(x) = ⟨c_σ, x⟩ for x ∈ σ. (c_σ solves
/// ⟨c_σ, b_ρ⟩ = s_ρ for the cone's rays: c_σ = (B_σ^{-1})^T·s_σ.)
pub fn phi_inf_cone_forms(fan: &StackyFan, s: &RaisedVector) -> Vec<Vec<Rat>> {
    let d = fan.rig_rank();
    (0..fan.max_cones().len())
        .map(|c| {
            let inv = fan.cone_inverse(c).expect("validated fan");
            let cone = &fan.max_cones()[c];
            (0..d)
                .map(|j| {
                    let mut v = Rat::zero();
                    for (k, &ri) in cone.iter().enumerate() {
                        v += &inv[(k, j)] * &s.ray[ri];
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// The Σ-piecewise-linear function φ^∞ with φ^∞(b_ρ) = s_ρ, evaluated at a
/// real vector. The containing cone is located with a small tolerance; on
/// shared faces all candidate cones give the same value.
pub fn phi_inf(fan: &StackyFan, s: &RaisedVector, x: &[f64]) -> f64 {
    let d = fan.rig_rank();
    assert_eq!(x.len(), d);
    let forms = phi_inf_cone_forms(fan, s);
    let mut best: Option<(f64, f64)> = None; // (min coord, value)
    for c in 0..fan.max_cones().len() {
        let inv = fan.cone_inverse(c).expect("validated fan");
        let mut min_a = f64::INFINITY;
        for k in 0..d {
            let mut a = 0.0;
            for j in 0..d {
                a += inv[(k, j)].to_f64().unwrap() * x[j];
            }
            min_a = min_a.min(a);
        }
        if best.map_or(true, |(m, _)| min_a > m) {
            let value: f64 = forms[c]
                .iter()
                .zip(x)
                .map(|(cj, xj)| cj.to_f64().unwrap() * xj)
                .sum();
            best = Some((min_a, value));
        }
    }
    let (min_a, value) = best.expect("fan has at least one cone");
    debug_assert!(
        min_a > -1e-9 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)),
        "point {x:?} not covered by any cone (complete fan expected)"
    );
    value
}

/// A rational point of the stacky torus 𝒯(ℚ): d nonzero torus coordinates
/// plus one nonzero class representative per torsion order (a class in
/// ℚ^×/(ℚ^×)^{ℓ_i}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusPointQ {
    pub x: Vec<Rat>,
    pub g: Vec<Rat>,
}

impl TorusPointQ {
    pub fn new(x: Vec<Rat>, g: Vec<Rat>) -> Self {
        assert!(x.iter().all(|v| !v.is_zero()), "torus coordinates must be nonzero");
        assert!(g.iter().all(|v| !v.is_zero()), "class representatives must be nonzero");
        TorusPointQ { x, g }
    }

    /// Torus point with all coordinates and class representatives 1.
    pub fn unit(fan: &StackyFan) -> Self {
        TorusPointQ {
            x: vec![num::One::one(); fan.rig_rank()],
            g: vec![num::One::one(); fan.torsion_orders().len()],
        }
    }

    /// Primes appearing in any numerator or denominator of the point.
    pub fn support(&self) -> Vec<u64> {
        let mut primes = std::collections::BTreeSet::new();
        for v in self.x.iter().chain(&self.g) {
            for (p, _) in factorize(v.numer()) {
                primes.insert(p);
            }
            for (p, _) in factorize(v.denom()) {
                primes.insert(p);
            }
        }
        primes.into_iter().collect()
    }

    /// The valuation data (y_p, g_p) at a prime: y_p = (ord_p x_j)_j and
    /// g_p = (ord_p g_i mod ℓ_i)_i.
    pub fn valuation_data(&self, fan: &StackyFan, p: u64) -> (Vec<Int>, Vec<u32>) {
        let y: Vec<Int> = self.x.iter().map(|v| Int::from(ord_p(v, p))).collect();
        let g: Vec<u32> = self
            .g
            .iter()
            .zip(fan.torsion_orders())
            .map(|(v, &l)| (ord_p(v, p)).rem_euclid(l as i64) as u32)
            .collect();
        (y, g)
    }
}

/// ord_p of a nonzero rational.
pub fn ord_p(v: &Rat, p: u64) -> i64 {
    let e = |n: &Int| -> i64 {
        factorize(n)
            .into_iter()
            .find(|&(q, _)| q == p)
            .map_or(0, |(_, e)| e as i64)
    };
    e(v.numer()) - e(v.denom())
}

/// Local height at a finite place: H_p = p^{φ_s(y_p, g_p)}. Returns the
/// float value together with the exact rational exponent.
pub fn local_height_finite(
    fan: &StackyFan,
    s: &RaisedVector,
    p: u64,
    point: &TorusPointQ,
) -> (f64, Rat) {
    let (y, g) = point.valuation_data(fan, p);
    let e = phi(fan, s, &y, &g);
    ((p as f64).powf(e.to_f64().unwrap()), e)
}

/// Exact finite part of the global height, as prime-exponent pairs over the
/// support of the point (exponent zero entries dropped).
pub fn finite_height_exponents(
    fan: &StackyFan,
    s: &RaisedVector,
    point: &TorusPointQ,
) -> Vec<(u64, Rat)> {
    point
        .support()
        .into_iter()
        .filter_map(|p| {
            let (_, e) = local_height_finite(fan, s, p, point);
            if e.is_zero() {
                None
            } else {
                Some((p, e))
            }
        })
        .collect()
}

/// The global height H(s, point) = ∏_p p^{φ_s(y_p,g_p)} ·
/// exp(φ^∞((log|x_j|)_j)). Independent of coordinate signs and of the choice
/// of class representatives modulo ℓ_i-th powers.
pub fn global_height(fan: &StackyFan, s: &RaisedVector, point: &TorusPointQ) -> f64 {
    let mut log_h = 0.0f64;
    for (p, e) in finite_height_exponents(fan, s, point) {
        log_h += e.to_f64().unwrap() * (p as f64).ln();
    }
    let logs: Vec<f64> = point
        .x
        .iter()
        .map(|v| v.to_f64().unwrap().abs().ln())
        .collect();
    log_h += phi_inf(fan, s, &logs);
    log_h.exp()
}
