//! The rational functions R_σ, R_Σ, the polynomial Q_Σ, local Fourier
//! transforms of heights at the trivial character, the Euler product γ with
//! rigorous tail bounds, and the exact archimedean transform Ĥ_∞.
//!
//! Variables are indexed by Σ(1) ∪ twisted sectors: first the rays in fan
//! order, then the twisted sectors in their canonical order.

use crate::exact_math::{Int, IntMatrix, Rat};
use crate::primes::primes_up_to;
use crate::raised_heights::{phi_with_twisted, xi_all, RaisedVector};
use crate::stacky_fan::{Sector, StackyFan};
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ZetaError {
    #[error("divergent evaluation: Ξ value {0} is not positive")]
    Divergent(String),
    #[error("Euler factor tail exponent {0} ≤ 1; product does not converge absolutely")]
    SlowTail(f64),
}

/// Sparse multivariate polynomial with integer coefficients; exponent
/// vectors are dense (the variable count is small).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    pub nvars: usize,
    /// exponent vector → nonzero coefficient
    pub terms: BTreeMap<Vec<u32>, Int>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: i64) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], Int::from(c));
        }
        p
    }

    /// The monomial X_v.
    pub fn var(nvars: usize, v: usize) -> Self {
        let mut e = vec![0u32; nvars];
        e[v] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, Int::one());
        p
    }

    pub fn add_term(&mut self, expo: Vec<u32>, coeff: Int) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(expo).or_insert_with(Int::zero);
        *entry += coeff;
        if entry.is_zero() {
            // re-fetch key: easiest is to prune zeros lazily
        }
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert_with(Int::zero);
            *entry += c;
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e).or_insert_with(Int::zero);
                *entry += c1 * c2;
            }
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut neg = other.clone();
        for c in neg.terms.values_mut() {
            *c = -c.clone();
        }
        self.add(&neg)
    }

    /// Sum of |coefficients|.
    pub fn l1_norm(&self) -> Int {
        self.terms.values().map(Signed::abs).sum()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, expo: &[u32]) -> Int {
        self.terms.get(expo).cloned().unwrap_or_else(Int::zero)
    }
}

/// All cones of Σ (faces of the maximal cones, as sorted ray-index sets,
/// including the zero cone ∅), deduplicated.
pub fn all_cones(fan: &StackyFan) -> Vec<Vec<usize>> {
    let mut cones: BTreeSet<Vec<usize>> = BTreeSet::new();
    for max in fan.max_cones() {
        // All subsets of a simplicial cone's rays are faces.
        let k = max.len();
        for mask in 0..(1u32 << k) {
            let face: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| max[i]).collect();
            cones.insert(face);
        }
    }
    cones.into_iter().collect()
}

/// Ray-support of a sector: indices of rays with a_ρ(Y) ≠ 0.
fn sector_support(sec: &Sector) -> Vec<usize> {
    sec.coords
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// The numerator of R_σ as a polynomial:
/// ∏_{ρ∈σ(1)} X_ρ + Σ_{Y twisted, y_Y ∈ σ} X_Y · ∏_{ρ∈σ(1): a_ρ(Y)=0} X_ρ.
fn r_sigma_numerator(fan: &StackyFan, twisted: &[Sector], cone: &[usize]) -> SparsePoly {
    let nrays = fan.rays().len();
    let nvars = nrays + twisted.len();
    let mut expo = vec![0u32; nvars];
    for &ri in cone {
        expo[ri] = 1;
    }
    let mut out = SparsePoly::zero(nvars);
    out.terms.insert(expo, Int::one());
    for (j, sec) in twisted.iter().enumerate() {
        let supp = sector_support(sec);
        if supp.iter().all(|ri| cone.contains(ri)) {
            let mut e = vec![0u32; nvars];
            e[nrays + j] = 1;
            for &ri in cone {
                if sec.coords[ri].is_zero() {
                    e[ri] = 1;
                }
            }
            let entry = out.terms.entry(e).or_insert_with(Int::zero);
            *entry += Int::one();
        }
    }
    out
}

/// Q_Σ = R_Σ · ∏_{ρ∈Σ(1)} (1 − X_ρ), expanded exactly. Its constant term
/// is 1 and its degree-1 part is exactly Σ_Y X_Y.
pub fn q_sigma_poly(fan: &StackyFan) -> SparsePoly {
    let twisted = fan.twisted_sectors();
    let nrays = fan.rays().len();
    let nvars = nrays + twisted.len();
    let mut q = SparsePoly::zero(nvars);
    for cone in all_cones(fan) {
        // numerator(σ) · ∏_{ρ ∉ σ} (1 − X_ρ)
        let mut term = r_sigma_numerator(fan, &twisted, &cone);
        for ri in 0..nrays {
            if !cone.contains(&ri) {
                let factor =
                    SparsePoly::constant(nvars, 1).sub(&SparsePoly::var(nvars, ri));
                term = term.mul(&factor);
            }
        }
        q = q.add(&term);
    }
    q
}

/// Ξ values of s in variable order (rays then twisted sectors); error if
/// any is ≤ 0.
fn positive_xi(fan: &StackyFan, s: &RaisedVector) -> Result<Vec<Rat>, ZetaError> {
    let xs = xi_all(fan, s);
    for v in &xs {
        if !v.is_positive() {
            return Err(ZetaError::Divergent(v.to_string()));
        }
    }
    Ok(xs)
}

/// The local Fourier transform of the height at the trivial character:
/// R_Σ evaluated at X_ρ = p^{−Ξ_ρ(s)} for ρ ∈ Σ(1) ∪ twisted.
pub fn local_transform(fan: &StackyFan, s: &RaisedVector, p: u64) -> Result<f64, ZetaError> {
    let xs = positive_xi(fan, s)?;
    let x: Vec<f64> = xs
        .iter()
        .map(|e| (p as f64).powf(-e.to_f64().unwrap()))
        .collect();
    let twisted = fan.twisted_sectors();
    let nrays = fan.rays().len();
    let mut total = 0.0f64;
    for cone in all_cones(fan) {
        let numer = r_sigma_numerator(fan, &twisted, &cone);
        let mut val = 0.0f64;
        for (e, c) in &numer.terms {
            let mut m = c.to_f64().unwrap();
            for (v, &ev) in e.iter().enumerate() {
                for _ in 0..ev {
                    m *= x[v];
                }
            }
            val += m;
        }
        for &ri in &cone {
            val /= 1.0 - x[ri];
        }
        total += val;
        let _ = nrays;
    }
    Ok(total)
}

/// Independent oracle for [`local_transform`]: the direct sum
/// Σ_{(y,g), ‖y‖∞ ≤ radius} p^{−φ_s(y,g)} with a certified geometric tail
/// bound from the growth φ_s(y,g) ≥ c·‖y‖∞ − d·s_min.
pub fn local_transform_oracle(
    fan: &StackyFan,
    s: &RaisedVector,
    p: u64,
    radius: u32,
) -> Result<(f64, f64), ZetaError> {
    positive_xi(fan, s)?;
    let d = fan.rig_rank();
    let twisted = fan.twisted_sectors();
    // Torsion tuples.
    let mut gs: Vec<Vec<u32>> = vec![vec![]];
    for &l in fan.torsion_orders() {
        gs = gs
            .iter()
            .flat_map(|t| {
                (0..l).map(move |g| {
                    let mut t2 = t.clone();
                    t2.push(g);
                    t2
                })
            })
            .collect();
    }
    let r = radius as i64;
    // Kahan-compensated summation keeps the rounding error at a few ulps.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let add = |v: f64, sum: &mut f64, comp: &mut f64| {
        let t = v - *comp;
        let next = *sum + t;
        *comp = (next - *sum) - t;
        *sum = next;
    };
    let mut y = vec![-r; d];
    'outer: loop {
        let yi: Vec<Int> = y.iter().map(|&v| Int::from(v)).collect();
        for g in &gs {
            let e = phi_with_twisted(fan, &twisted, s, &yi, g);
            add((p as f64).powf(-e.to_f64().unwrap()), &mut sum, &mut comp);
        }
        for j in 0..d {
            if y[j] < r {
                y[j] += 1;
                continue 'outer;
            }
            y[j] = -r;
        }
        break;
    }
    // Tail: φ_s(y,g) ≥ c·‖y‖∞ − d·s_min with c = s_min / max_ρ ‖b_ρ‖∞,
    // where s_min = min_ρ s_ρ. Shell ‖y‖∞ = m has at most 2d·(2m+1)^{d−1}
    // points, each contributing #G^D torsion tuples.
    let s_min = s
        .ray
        .iter()
        .min()
        .expect("fan has rays")
        .to_f64()
        .unwrap();
    let max_b = fan
        .rays()
        .iter()
        .flat_map(|ray| ray.b.iter())
        .map(|v| v.abs().to_f64().unwrap())
        .fold(0.0, f64::max);
    let c = s_min / max_b;
    let gd = fan.gd_order() as f64;
    let x = (p as f64).powf(-c);
    let shift = (p as f64).powf((d as f64) * s_min);
    let f = |m: f64| gd * 2.0 * (d as f64) * (2.0 * m + 1.0).powi(d as i32 - 1) * shift * x.powf(m);
    let mut tail = 0.0f64;
    let mut m = r + 1;
    loop {
        // Geometric-ratio closure once the polynomial factor is flat enough.
        let ratio = x * ((2.0 * m as f64 + 3.0) / (2.0 * m as f64 + 1.0)).powi(d as i32 - 1);
        if ratio < 0.9 {
            tail += f(m as f64) / (1.0 - ratio);
            break;
        }
        tail += f(m as f64);
        m += 1;
        if m > r + 100_000 {
            return Err(ZetaError::SlowTail(c));
        }
    }
    // Allowance for float rounding in both the partial sum and the exact
    // evaluation it is compared against (compensated summation keeps the
    // former at a few ulps).
    tail += 1e-13 * (1.0 + sum.abs());
    Ok((sum, tail))
}

/// One Euler factor of γ at p:
/// local_transform(p) · ∏_{ρ∈Σ(1)∪twisted} (1 − p^{−Ξ_ρ(s)}).
pub fn gamma_factor(fan: &StackyFan, s: &RaisedVector, p: u64) -> Result<f64, ZetaError> {
    let xs = positive_xi(fan, s)?;
    let mut v = local_transform(fan, s, p)?;
    for e in &xs {
        v *= 1.0 - (p as f64).powf(-e.to_f64().unwrap());
    }
    Ok(v)
}

/// Truncated Euler product γ(s) = ∏_p gamma_factor(p) over p ≤ prime_bound,
/// with a rigorous tail estimate.
///
/// The factor at p equals D(p^{−Ξ(s)}) for the polynomial
/// D = Q_Σ · ∏_Y (1 − X_Y), whose nonconstant monomials all have Ξ-weight
/// ≥ w_min (w_min = 2 at s = −K_X); hence |factor − 1| ≤ ‖D − 1‖₁ · p^{−w_min}
/// and the log-tail over p > P is at most ‖D − 1‖₁ · P^{1−w_min}/(w_min − 1),
/// up to the usual log(1−t) correction.
pub fn gamma_euler(
    fan: &StackyFan,
    s: &RaisedVector,
    prime_bound: u64,
) -> Result<(f64, f64), ZetaError> {
    let xs = positive_xi(fan, s)?;
    let twisted_count = fan.twisted_sectors().len();
    let nrays = fan.rays().len();
    // D = Q_Σ · ∏_Y (1 − X_Y), minus its constant term 1.
    let mut d_poly = q_sigma_poly(fan);
    for j in 0..twisted_count {
        let factor = SparsePoly::constant(nrays + twisted_count, 1)
            .sub(&SparsePoly::var(nrays + twisted_count, nrays + j));
        d_poly = d_poly.mul(&factor);
    }
    let d_minus_1 = d_poly.sub(&SparsePoly::constant(nrays + twisted_count, 1));
    let l1 = d_minus_1.l1_norm().to_f64().unwrap();
    let w_min = d_minus_1
        .terms
        .keys()
        .map(|e| {
            e.iter()
                .zip(&xs)
                .map(|(&ev, xi)| ev as f64 * xi.to_f64().unwrap())
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    if !(w_min > 1.0) {
        return Err(ZetaError::SlowTail(w_min));
    }
    let mut value = 1.0f64;
    for p in primes_up_to(prime_bound) {
        value *= gamma_factor(fan, s, p)?;
    }
    let pb = prime_bound.max(2) as f64;
    let per_factor = l1 * pb.powf(-w_min);
    if per_factor >= 0.5 {
        // Truncation too small for the bound to be meaningful.
        return Ok((value, f64::INFINITY));
    }
    let log_tail = l1 * pb.powf(1.0 - w_min) / (w_min - 1.0) / (1.0 - per_factor);
    let tail = value.abs() * (log_tail.exp() - 1.0);
    Ok((value, tail))
}

/// The archimedean transform Ĥ_∞(s) = ∫_{ℝ^d} exp(−φ_s^∞(x)) dx, exactly:
/// Σ over maximal cones σ of |det(b_ρ : ρ∈σ)| · ∏_{ρ∈σ(1)} 1/s_ρ.
pub fn h_inf_hat(fan: &StackyFan, s: &RaisedVector) -> Result<Rat, ZetaError> {
    for v in &s.ray {
        if !v.is_positive() {
            return Err(ZetaError::Divergent(v.to_string()));
        }
    }
    let mut total = Rat::zero();
    for cone in fan.max_cones() {
        let rows: Vec<Vec<Int>> = cone.iter().map(|&ri| fan.rays()[ri].b.clone()).collect();
        let det = IntMatrix::from_rows(&rows).det().abs();
        let mut term = Rat::from_integer(det);
        for &ri in cone {
            term /= &s.ray[ri];
        }
        total += term;
    }
    Ok(total)
}

/// Adaptive Simpson quadrature.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = (a + m) / 2.0;
        let rm = (m + b) / 2.0;
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let m = (a + b) / 2.0;
    let fa = f(a);
    let fb = f(b);
    let fm = f(m);
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

/// Numerical-quadrature oracle for [`h_inf_hat`] on fans of rank ≤ 2.
///
/// d = 1: each half-line mapped to [0,1) by t = u/(1−u).
/// d = 2: polar form ∫_0^{2π} φ_s^∞(cos θ, sin θ)^{−2} dθ, integrated
/// piecewise between consecutive ray angles (φ^∞ is linear on each piece).
pub fn h_inf_hat_quadrature(fan: &StackyFan, s: &RaisedVector) -> f64 {
    use crate::raised_heights::phi_inf;
    match fan.rig_rank() {
        1 => {
            let mut total = 0.0;
            for sign in [1.0f64, -1.0] {
                let f = |u: f64| -> f64 {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let t = u / (1.0 - u);
                    let jac = 1.0 / ((1.0 - u) * (1.0 - u));
                    (-phi_inf(fan, s, &[sign * t])).exp() * jac
                };
                total += adaptive_simpson(&f, 0.0, 1.0 - 1e-12, 1e-12, 40);
            }
            total
        }
        2 => {
            // Split [0, 2π] at the ray angles so the integrand is smooth on
            // each piece.
            let mut angles: Vec<f64> = fan
                .rays()
                .iter()
                .map(|r| {
                    let x = r.b[0].to_f64().unwrap();
                    let y = r.b[1].to_f64().unwrap();
                    y.atan2(x).rem_euclid(std::f64::consts::TAU)
                })
                .collect();
            angles.push(0.0);
            angles.push(std::f64::consts::TAU);
            angles.sort_by(f64::total_cmp);
            angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
            let f = |th: f64| -> f64 {
                let v = phi_inf(fan, s, &[th.cos(), th.sin()]);
                1.0 / (v * v)
            };
            angles
                .windows(2)
                .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-12, 40))
                .sum()
        }
        d => panic!("quadrature oracle implemented for d ≤ 2 only (got {d})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::{rat, ratio};
    use crate::raised_heights::anticanonical;
    use crate::stacky_fan::known_fans::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} !≈ {b}");
    }

    fn expo(pairs: &[(usize, u32)], nvars: usize) -> Vec<u32> {
        let mut e = vec![0; nvars];
        for &(v, k) in pairs {
            e[v] = k;
        }
        e
    }

    #[test]
    fn q_sigma_p1() {
        // Variables: 0 = plus, 1 = minus. Q = 1 − X₊X₋.
        let q = q_sigma_poly(&p1());
        assert_eq!(q.nvars, 2);
        assert_eq!(q.terms.len(), 2);
        assert_eq!(q.coeff(&expo(&[], 2)), 1.into());
        assert_eq!(q.coeff(&expo(&[(0, 1), (1, 1)], 2)), (-1).into());
    }

    #[test]
    fn q_sigma_p12() {
        // Variables: 0 = plus, 1 = minus, 2 = sector Y.
        // Q = 1 + X_Y − X₊X₋ − X₊X_Y.
        let q = q_sigma_poly(&p12());
        assert_eq!(q.terms.len(), 4);
        assert_eq!(q.coeff(&expo(&[], 3)), 1.into());
        assert_eq!(q.coeff(&expo(&[(2, 1)], 3)), 1.into());
        assert_eq!(q.coeff(&expo(&[(0, 1), (1, 1)], 3)), (-1).into());
        assert_eq!(q.coeff(&expo(&[(0, 1), (2, 1)], 3)), (-1).into());
    }

    #[test]
    fn q_sigma_p1xbmu2() {
        // Q = (1 + X_Y)(1 − X₊X₋).
        let q = q_sigma_poly(&p1xbmu2());
        assert_eq!(q.terms.len(), 4);
        assert_eq!(q.coeff(&expo(&[(2, 1)], 3)), 1.into());
        assert_eq!(q.coeff(&expo(&[(0, 1), (1, 1), (2, 1)], 3)), (-1).into());
    }

    #[test]
    fn q_sigma_structure() {
        for fan in [p1(), p12(), p23(), p2(), p1xbmu2()] {
            let q = q_sigma_poly(&fan);
            let ntw = fan.twisted_sectors().len();
            let nrays = fan.rays().len();
            assert_eq!(q.coeff(&vec![0; q.nvars]), 1.into());
            for (e, c) in &q.terms {
                let deg: u32 = e.iter().sum();
                if deg == 1 {
                    let v = e.iter().position(|&k| k == 1).unwrap();
                    assert!(v >= nrays, "degree-1 ray monomial in Q_Σ");
                    assert_eq!(*c, 1.into());
                }
            }
            // Every twisted variable appears in degree 1.
            for j in 0..ntw {
                assert_eq!(q.coeff(&expo(&[(nrays + j, 1)], q.nvars)), 1.into());
            }
        }
    }

    #[test]
    fn local_transform_p1() {
        let fan = p1();
        let k = anticanonical(&fan);
        approx(local_transform(&fan, &k, 2).unwrap(), 3.0, 1e-12);
    }

    #[test]
    fn local_transform_p12() {
        let fan = p12();
        let k = anticanonical(&fan);
        approx(local_transform(&fan, &k, 2).unwrap(), 4.0, 1e-12);
    }

    #[test]
    fn local_transform_p1xbmu2() {
        let fan = p1xbmu2();
        let k = anticanonical(&fan);
        // (1 + 1/2)² / (1 − 1/2) = 4.5
        approx(local_transform(&fan, &k, 2).unwrap(), 4.5, 1e-12);
    }

    #[test]
    fn local_transform_large_p_tends_to_one() {
        for fan in [p1(), p12(), p2(), p1xbmu2()] {
            let k = anticanonical(&fan);
            let v = local_transform(&fan, &k, 1_000_003).unwrap();
            assert!((v - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn local_transform_divergence() {
        let fan = p12();
        let s = RaisedVector {
            ray: vec![rat(1), rat(1)],
            sector: vec![rat(-1)],
        };
        assert!(matches!(
            local_transform(&fan, &s, 2),
            Err(ZetaError::Divergent(_))
        ));
    }

    #[test]
    fn oracle_matches_transform() {
        for fan in [p1(), p12(), p23(), p1xbmu2()] {
            let k = anticanonical(&fan);
            for p in [2u64, 3, 101] {
                let exact = local_transform(&fan, &k, p).unwrap();
                let (sum, tail) = local_transform_oracle(&fan, &k, p, 120).unwrap();
                assert!(
                    (exact - sum).abs() <= tail,
                    "fan mismatch at p={p}: exact={exact} sum={sum} tail={tail}"
                );
            }
        }
    }

    #[test]
    fn oracle_radius_zero() {
        // Only (y=0, g) terms: for ℙ¹×Bμ₂ at −K_X this is 1 + p^{−1}.
        let fan = p1xbmu2();
        let k = anticanonical(&fan);
        let (sum, _) = local_transform_oracle(&fan, &k, 2, 0).unwrap();
        approx(sum, 1.5, 1e-12);
    }

    #[test]
    fn gamma_factor_closed_forms() {
        let k1 = anticanonical(&p1());
        for p in [2u64, 3, 5, 7] {
            let x = 1.0 / p as f64;
            approx(gamma_factor(&p1(), &k1, p).unwrap(), 1.0 - x * x, 1e-12);
        }
        let fan = p12();
        let k = anticanonical(&fan);
        approx(gamma_factor(&fan, &k, 2).unwrap(), 0.5, 1e-12);
        for p in [3u64, 5, 7, 11] {
            let x = 1.0 / p as f64;
            // (1 + 2x)(1 − x)² = 1 − 3x² + 2x³
            approx(
                gamma_factor(&fan, &k, p).unwrap(),
                1.0 - 3.0 * x * x + 2.0 * x * x * x,
                1e-12,
            );
        }
        let fan = p1xbmu2();
        let k = anticanonical(&fan);
        for p in [2u64, 3, 5] {
            let x = 1.0 / p as f64;
            approx(
                gamma_factor(&fan, &k, p).unwrap(),
                (1.0 - x * x) * (1.0 - x * x),
                1e-12,
            );
        }
    }

    #[test]
    fn gamma_euler_p1_is_one_over_zeta2() {
        let fan = p1();
        let k = anticanonical(&fan);
        let (v, tail) = gamma_euler(&fan, &k, 10_000).unwrap();
        let target = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((v - target).abs() <= tail + 1e-9, "v={v} target={target} tail={tail}");
        assert!(tail < 1e-3);
    }

    #[test]
    fn gamma_tail_decreases() {
        let fan = p12();
        let k = anticanonical(&fan);
        let (_, t1) = gamma_euler(&fan, &k, 100).unwrap();
        let (_, t2) = gamma_euler(&fan, &k, 1000).unwrap();
        assert!(t2 < t1);
        // Values stabilize within the wider tail.
        let (v1, _) = gamma_euler(&fan, &k, 100).unwrap();
        let (v2, _) = gamma_euler(&fan, &k, 1000).unwrap();
        assert!((v1 - v2).abs() <= t1);
    }

    #[test]
    fn h_inf_hat_values() {
        let fan = p1();
        let k = anticanonical(&fan);
        assert_eq!(h_inf_hat(&fan, &k).unwrap(), rat(2));
        assert_eq!(h_inf_hat(&fan, &k.scale(&rat(2))).unwrap(), rat(1));
        let fan = p12();
        let k = anticanonical(&fan);
        assert_eq!(h_inf_hat(&fan, &k).unwrap(), rat(3));
        let fan = p2();
        let k = anticanonical(&fan);
        // dets: 1, 1, 1 over the three cones; all s_ρ = 1 → 3.
        assert_eq!(h_inf_hat(&fan, &k).unwrap(), rat(3));
    }

    #[test]
    fn h_inf_hat_divergence() {
        let fan = p1();
        let s = RaisedVector {
            ray: vec![rat(1), rat(0)],
            sector: vec![],
        };
        assert!(h_inf_hat(&fan, &s).is_err());
    }

    #[test]
    fn h_inf_hat_matches_quadrature() {
        for fan in [p1(), p12(), p23(), p2(), p1xbmu2()] {
            let k = anticanonical(&fan);
            for s in [
                k.clone(),
                k.scale(&rat(2)),
                RaisedVector {
                    ray: k.ray.iter().map(|v| v + ratio(1, 3)).collect(),
                    sector: k.sector.clone(),
                },
            ] {
                let exact = h_inf_hat(&fan, &s).unwrap().to_f64().unwrap();
                let quad = h_inf_hat_quadrature(&fan, &s);
                assert!(
                    (exact - quad).abs() < 1e-8 * (1.0 + exact),
                    "exact={exact} quad={quad}"
                );
            }
        }
    }
}
