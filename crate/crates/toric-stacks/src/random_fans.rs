//! Seeded random complete stacky fans for property-test suites.
//!
//! Constructions are valid by design:
//! - d = 1: two opposite rays (u), (−v) with u, v ≥ 1;
//! - d = 2: angle-sorted primitive rays containing (1,0), (0,1), (−1,−1)
//!   plus random extras, with consecutive cones;
//! - d = 3: stellar subdivisions of the octant fan on ±e_i, followed by a
//!   random unimodular change of coordinates.
//!
//! Torsion orders (gerbe factors) are attached at random.

use crate::exact_math::Int;
use crate::stacky_fan::{Ray, StackyFan};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn build(d: usize, torsion: Vec<u32>, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> StackyFan {
    let ray_objs: Vec<Ray> = rays
        .iter()
        .enumerate()
        .map(|(i, b)| Ray {
            id: format!("r{i}"),
            b: b.iter().map(|&v| Int::from(v)).collect(),
        })
        .collect();
    let cone_ids: Vec<Vec<String>> = cones
        .iter()
        .map(|c| c.iter().map(|&i| format!("r{i}")).collect())
        .collect();
    StackyFan::new(d, torsion, ray_objs, cone_ids).expect("constructed fan is structurally valid")
}

fn random_torsion(rng: &mut ChaCha8Rng) -> Vec<u32> {
    let count = rng.gen_range(0..=2);
    (0..count).map(|_| rng.gen_range(2..=4)).collect()
}

/// A random complete stacky fan of rigidified rank 1.
pub fn random_fan_d1(rng: &mut ChaCha8Rng) -> StackyFan {
    let u = rng.gen_range(1..=3i64);
    let v = rng.gen_range(1..=3i64);
    let torsion = random_torsion(rng);
    build(1, torsion, vec![vec![u], vec![-v]], vec![vec![0], vec![1]])
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A random complete stacky fan of rigidified rank 2: random primitive rays
/// around the base triangle, consecutive cones in angular order.
pub fn random_fan_d2(rng: &mut ChaCha8Rng) -> StackyFan {
    let mut dirs: Vec<(i64, i64)> = vec![(1, 0), (0, 1), (-1, -1)];
    let extras = rng.gen_range(0..=3);
    for _ in 0..extras {
        let x = rng.gen_range(-4..=4i64);
        let y = rng.gen_range(-4..=4i64);
        if x == 0 && y == 0 {
            continue;
        }
        let g = gcd(x, y);
        let dir = (x / g, y / g);
        if !dirs.contains(&dir) {
            dirs.push(dir);
        }
    }
    dirs.sort_by(|a, b| {
        let ang = |&(x, y): &(i64, i64)| (y as f64).atan2(x as f64);
        ang(a).total_cmp(&ang(b))
    });
    // Optional stacky scaling of each ray.
    let rays: Vec<Vec<i64>> = dirs
        .iter()
        .map(|&(x, y)| {
            let m = rng.gen_range(1..=2i64);
            vec![m * x, m * y]
        })
        .collect();
    let n = rays.len();
    let cones: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    let torsion = random_torsion(rng);
    build(2, torsion, rays, cones)
}

/// A random complete stacky fan of rigidified rank 3: stellar subdivisions
/// of the fan on ±e_i, then a random unimodular shear.
pub fn random_fan_d3(rng: &mut ChaCha8Rng) -> StackyFan {
    let mut rays: Vec<Vec<i64>> = vec![
        vec![1, 0, 0],
        vec![-1, 0, 0],
        vec![0, 1, 0],
        vec![0, -1, 0],
        vec![0, 0, 1],
        vec![0, 0, -1],
    ];
    let mut cones: Vec<Vec<usize>> = Vec::new();
    for &i in &[0usize, 1] {
        for &j in &[2usize, 3] {
            for &k in &[4usize, 5] {
                cones.push(vec![i, j, k]);
            }
        }
    }
    let subdivisions = rng.gen_range(0..=3);
    for _ in 0..subdivisions {
        let ci = rng.gen_range(0..cones.len());
        let cone = cones.swap_remove(ci);
        let s: Vec<i64> = (0..3)
            .map(|t| cone.iter().map(|&ri| rays[ri][t]).sum())
            .collect();
        let si = rays.len();
        rays.push(s);
        for omit in 0..3 {
            let mut newc: Vec<usize> = cone.clone();
            newc[omit] = si;
            cones.push(newc);
        }
    }
    // Random unimodular shear: product of elementary row operations.
    let mut u = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(0..3usize);
        let mut b = rng.gen_range(0..3usize);
        if a == b {
            b = (b + 1) % 3;
        }
        let m = rng.gen_range(-1..=1i64);
        for col in 0..3 {
            u[a][col] += m * u[b][col];
        }
    }
    let rays: Vec<Vec<i64>> = rays
        .iter()
        .map(|r| (0..3).map(|i| (0..3).map(|j| u[i][j] * r[j]).sum()).collect())
        .collect();
    let torsion = random_torsion(rng);
    build(3, torsion, rays, cones)
}

/// A random complete stacky fan of rigidified rank ≤ `max_d`.
pub fn random_fan(seed: u64, max_d: usize) -> StackyFan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match rng.gen_range(1..=max_d.clamp(1, 3)) {
        1 => random_fan_d1(&mut rng),
        2 => random_fan_d2(&mut rng),
        _ => random_fan_d3(&mut rng),
    }
}
