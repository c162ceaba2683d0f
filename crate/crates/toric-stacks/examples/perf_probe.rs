use toric_stacks::counting::{count_points, count_points_naive};
use toric_stacks::raised_heights::anticanonical;
use toric_stacks::stacky_fan::known_fans::*;

fn main() {
    for (name, fan) in [("p1", p1()), ("p12", p12()), ("p23", p23()), ("p2", p2()), ("p1xbmu2", p1xbmu2())] {
        let k = anticanonical(&fan);
        let t = std::time::Instant::now();
        let fast = count_points(&fan, &k, 1000.0, None).unwrap();
        let tf = t.elapsed();
        let t = std::time::Instant::now();
        match count_points_naive(&fan, &k, 1000.0) {
            Ok(naive) => println!(
                "{name} B=1000 fast={} naive={} match={} ({tf:?} / {:?})",
                fast.n_h, naive.n_h, fast.n_h == naive.n_h && fast.sector_tally == naive.sector_tally,
                t.elapsed()
            ),
            Err(e) => println!("{name} naive ERR {e}"),
        }
    }
}
