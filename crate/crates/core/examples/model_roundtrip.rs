//! Train a small soft-voting forest, save it, load it back and check that
//! predictions agree.

use dp_lumberjack::data::gen_moons;
use dp_lumberjack::forest::{deserialize, predict, serialize, train, TrainConfig};
use dp_lumberjack::privacy::{EpsilonDelta, LeafMechanismKind};

fn main() -> dp_lumberjack::Result<()> {
    let (schema, data) = gen_moons(2000, (5.0, 4.0), 7);
    let cfg = TrainConfig::new(EpsilonDelta::new(2.0, 1e-6)?)
        .with_trees(5)
        .with_depth(40)
        .with_leaf(LeafMechanismKind::GaussianCounts)
        .with_seed(7);
    let model = train(&data, &schema, &cfg)?;
    let text = serialize(&model);
    println!("model file: {} bytes, {} leaves", text.len(), model.num_leaves());
    for line in text.lines().take(6) {
        println!("  {}", if line.len() > 100 { &line[..100] } else { line });
    }

    let back = deserialize(&text)?;
    let same = (0..data.len()).all(|i| predict(&model, &data.row(i)) == predict(&back, &data.row(i)));
    println!("roundtrip identical: {}, predictions identical: {same}", back == model);

    let p = predict(&back, &data.row(0));
    println!("row 0 -> {} with scores {:.3?}", schema.classes()[p.class as usize], p.scores);
    Ok(())
}
