// Rank of the ReLU construction and growth of its bias norm.

use wl_embed::theory::{
    construction_rank, norm_profile, relu_construction, triangular_order, verify_theorem,
    TheoremRow,
};
use wl_embed::Result;

pub fn run_example() -> Result<()> {
    let construction = relu_construction(1, 2, 1.0)?;
    println!(
        "digit weights {}, biases {}",
        construction.digit_weights, construction.bias
    );
    println!(
        "block in triangular order:\n{}",
        triangular_order(&construction.block()?)
    );

    let (h, rank) = construction_rank(2, 2, 0.5)?;
    println!("K=2 M=2: response matrix {:?}, rank {rank}", h.dim());

    println!("{}", TheoremRow::csv_header());
    for row in verify_theorem(2, 3, 10_000)? {
        println!("{}", row.to_csv());
    }
    for row in norm_profile(1, &[4, 8, 16, 32])? {
        println!(
            "M={:<3} |b|={:<10.2} ratio={:.4}",
            row.max_degree, row.bias_norm, row.ratio
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
