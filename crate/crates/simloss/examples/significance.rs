//! Paired signed-rank test on per-seed scores of two systems.

use simloss::metrics::{wilcoxon_signed_rank, PairedSamples, DEFAULT_ALPHA};

fn main() -> simloss::Result<()> {
    let baseline = vec![0.205, 0.187, 0.220, 0.203, 0.218, 0.209, 0.230, 0.187, 0.204, 0.228];
    let candidate = vec![0.186, 0.181, 0.207, 0.180, 0.183, 0.201, 0.188, 0.189, 0.185, 0.213];
    let result = wilcoxon_signed_rank(&PairedSamples::new(candidate, baseline)?, DEFAULT_ALPHA)?;
    println!("{result:#?}");

    let noisy = PairedSamples::new(vec![1.0, 2.0, 3.0, 4.0], vec![1.5, 1.0, 3.5, 3.0])?;
    println!("{:#?}", wilcoxon_signed_rank(&noisy, DEFAULT_ALPHA)?);
    Ok(())
}
