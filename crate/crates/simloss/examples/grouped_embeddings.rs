//! Grouped classes with name embeddings: the lower bound controls how much
//! credit same-group classes receive.

use simloss::data::{split, synth_grouped, GroupedParams, SplitSpec};
use simloss::metrics::{accuracy, failed_superclass_accuracy, superclass_accuracy};
use simloss::model::{train, EarlyStopMetric, TrainConfig};
use simloss::sim_matrix::lower_bound_matrix;
use simloss::LabelBatch;

fn main() -> simloss::Result<()> {
    let params = GroupedParams {
        group_count: 4,
        classes_per_group: 3,
        per_class: 60,
        embed_dim: 8,
        within_sigma: 0.3,
        feature_sigma: 0.4,
    };
    let (data, table) = synth_grouped(&params, 11)?;
    let raw = table.similarity_matrix();
    let map = data.superclasses().expect("grouped data has superclasses").clone();
    let splits = split(&data, &SplitSpec::default())?.standardized();
    let targets = LabelBatch::from_vec(splits.test.labels().to_vec());
    let config = TrainConfig::new(15, 60, EarlyStopMetric::ValidationAccuracy);

    for l in [0.0, 0.5, 0.99] {
        let s = lower_bound_matrix(raw.view(), l)?;
        let outcome = train(&splits, &s, &[params.embed_dim, 32, data.class_count()], &config)?;
        let p = outcome.network.predict(splits.test.features())?;
        let fsa = failed_superclass_accuracy(&p, &targets, &map)?;
        println!(
            "l = {l}: accuracy {:.3}, superclass accuracy {:.3}, failed superclass accuracy {}",
            accuracy(&p, &targets)?,
            superclass_accuracy(&p, &targets, &map)?,
            fsa.map_or("undefined".into(), |v| format!("{v:.3}"))
        );
    }
    Ok(())
}
