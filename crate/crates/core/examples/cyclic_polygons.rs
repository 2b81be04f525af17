//! Every cyclic configuration of a pentagon with its Morse index.

use linkage_area::geom::{enumerate_cyclic, solve_cyclic};
use linkage_area::morse::cyclic_index;

fn main() -> anyhow::Result<()> {
    let lengths = [1.0, 1.3, 0.8, 1.1, 0.7];
    let found = enumerate_cyclic(&lengths)?;
    println!("{:>8} {:>3} {:>3} {:>10} {:>10}", "eps", "w", "mu", "R", "area");
    for p in &found.polygons {
        let eps: String = p.eps.iter().map(|&e| if e > 0 { '+' } else { '-' }).collect();
        println!("{eps:>8} {:>3} {:>3} {:>10.6} {:>10.6}", p.winding, cyclic_index(p)?, p.radius, p.area());
    }
    for w in &found.warnings {
        println!("note: {w}");
    }

    // a single sign pattern: the convex counterclockwise pentagon
    let convex = solve_cyclic(&lengths, &[1; 5], 1)?;
    println!("convex: R = {:.12}, index {}", convex[0].radius, cyclic_index(&convex[0])?);
    Ok(())
}
