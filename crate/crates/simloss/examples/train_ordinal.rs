//! Trains one network with and without neighbour credit on ordered classes.

use simloss::data::{split, synth_ordinal, OrdinalParams, SplitSpec};
use simloss::metrics::{accuracy, mae};
use simloss::model::{train, EarlyStopMetric, TrainConfig};
use simloss::sim_matrix::order_matrix;
use simloss::LabelBatch;

fn main() -> simloss::Result<()> {
    let data = synth_ordinal(&OrdinalParams::new(12, 80, 0.5), 7)?;
    let splits = split(&data, &SplitSpec::default())?.standardized();
    let targets = LabelBatch::from_vec(splits.test.labels().to_vec());
    let mut config = TrainConfig::new(10, 60, EarlyStopMetric::ValidationMae);
    config.seed = 3;

    for r in [0.0, 0.4, 0.8] {
        let outcome = train(&splits, &order_matrix(12, r)?, &[3, 32, 32, 12], &config)?;
        let predictions = outcome.network.predict(splits.test.features())?;
        println!(
            "r = {r}: best epoch {} of {}, test accuracy {:.3}, test MAE {:.3}",
            outcome.best_epoch,
            outcome.history.len(),
            accuracy(&predictions, &targets)?,
            mae(&predictions, &targets)?
        );
    }
    Ok(())
}
