//! The three proximity kernels on a pair of shifted series.

use mtsce::distance::{dist_dtw, dist_l1, dist_l2, DistanceKind};
use mtsce::MtsInstance;

fn main() -> mtsce::Result<()> {
    let a = MtsInstance::from_rows("a", &[vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 1.0], vec![1.0, 1.0]])?;
    let b = MtsInstance::from_rows("b", &[vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 1.0]])?;
    println!("l1  = {}", dist_l1(&a, &b)?);
    println!("l2  = {}", dist_l2(&a, &b)?);
    println!("dtw = {}", dist_dtw(&a, &b)?);
    for kind in ["l1", "euclidean", "dtw"] {
        let k: DistanceKind = kind.parse()?;
        println!("{kind} parses as {k}: {}", k.distance(&a, &b)?);
    }
    Ok(())
}
