//! Builds the two matrix families and prints them.

use simloss::sim_matrix::{lower_bound_matrix, order_matrix, row_normalize};
use simloss::EmbeddingTable;

fn print(title: &str, rows: ndarray::ArrayView2<'_, f64>) {
    println!("{title}");
    for row in rows.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("  [{}]", cells.join(", "));
    }
}

fn main() -> simloss::Result<()> {
    let ordered = order_matrix(5, 0.5)?;
    print("order matrix, r = 0.5", ordered.view());
    print("row-normalized", row_normalize(&ordered).view());

    let table = EmbeddingTable::parse(
        "rose 0.9 0.1 0.0\norchid 0.8 0.3 0.1\ntulip 0.85 0.2 -0.1\ntruck -0.1 0.2 0.95\nbus 0.0 0.4 0.9\n",
    )?;
    let raw = table.similarity_matrix();
    print("clamped cosine similarities", raw.view());
    for l in [0.0, 0.5, 0.9] {
        let m = lower_bound_matrix(raw.view(), l)?;
        print(&format!("lower bound l = {l}"), m.view());
    }
    Ok(())
}
