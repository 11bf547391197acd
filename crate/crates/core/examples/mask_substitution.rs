//! Copying masked cells of a donor into a query inside a window.

use mtsce::series::{hamming, substitute_window};
use mtsce::{Mask, MtsInstance, Subsequence};

fn main() -> mtsce::Result<()> {
    let query = MtsInstance::zeros("query", 6, 2)?;
    let donor = MtsInstance::new("donor", 6, 2, (1..=12).map(f64::from).collect())?;
    let window = Subsequence::new(2, 4, query.len())?;
    let mask = Mask::from_rows(&[vec![1, 0], vec![1, 1], vec![0, 1]])?;

    let ce = substitute_window(&query, &donor, window, &mask)?;
    for (s, row) in ce.rows().iter().enumerate() {
        let marker = if window.contains(s) { "*" } else { " " };
        println!("{marker} {s}: {row:?}");
    }
    println!("cells changed: {} (mask has {})", hamming(&ce, &query)?, mask.popcount());
    Ok(())
}
