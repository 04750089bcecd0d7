//! Ideal Bug path for each bundled world, split into its three segments.

use virtlab::bundled::assignments;
use virtlab::reference::bug_reference_path;

fn main() {
    for a in assignments() {
        match bug_reference_path(&a.world) {
            Ok(p) => {
                println!(
                    "{:<10} L_pre {:>7.3}  P_followed {:>7.3}  L_post {:>7.3}  L_total {:>7.3}",
                    a.id, p.l_pre, p.p_followed, p.l_post, p.l_total
                );
                if let (Some(h), Some(l)) = (p.hit_point, p.leave_point) {
                    println!("{:<10} hit ({:.3}, {:.3}) leave ({:.3}, {:.3})", "", h.x, h.y, l.x, l.y);
                }
            }
            Err(e) => println!("{:<10} {e}", a.id),
        }
    }
}
