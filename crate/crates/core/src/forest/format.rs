use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::hh::{HeavySet, NodeId};
use crate::tree::{FeatureSchema, SplitKind, SplitRule};
use crate::{Error, Result};

use super::config::AccountingTranscript;
use super::model::{ForestModel, LeafPredictor, PrunedTree};

pub const MODEL_VERSION: u32 = 1;

const CHECKSUM_HEADER: &str = "[checksum]\n";

/// Text model file: `[meta]`, `[accounting]`, `[trees]` and a trailing
/// `[checksum]` holding the SHA-256 of everything before it.
pub fn serialize(model: &ForestModel) -> String {
    let mut s = String::new();
    s.push_str("[meta]\n");
    let _ = writeln!(s, "version={MODEL_VERSION}");
    let _ = writeln!(s, "seed={}", model.seed);
    let _ = writeln!(s, "schema_hash={}", model.schema.hash());
    let _ = writeln!(s, "schema={}", model.schema.to_json());
    s.push_str("[accounting]\n");
    for (k, v) in model.transcript.fields() {
        let _ = writeln!(s, "{k}={v}");
    }
    s.push_str("[trees]\n");
    for (t, tree) in model.trees.iter().enumerate() {
        let _ = writeln!(s, "tree {t}");
        let _ = write!(s, "heavy");
        for u in tree.heavy().iter() {
            let _ = write!(s, " {u}");
        }
        s.push('\n');
        for (u, rule) in tree.heavy().iter().zip(tree.rules()) {
            match rule {
                Some(SplitRule { feature, kind: SplitKind::Threshold(t) }) => {
                    let _ = writeln!(s, "rule {u} threshold {feature} {t}");
                }
                Some(SplitRule { feature, kind: SplitKind::CategoryIs(c) }) => {
                    let _ = writeln!(s, "rule {u} category {feature} {c}");
                }
                None => {
                    let _ = writeln!(s, "rule {u} forced - -");
                }
            }
        }
        for (leaf, p) in tree.leaves().iter().zip(tree.predictors()) {
            match p {
                LeafPredictor::Class(c) => {
                    let _ = writeln!(s, "leaf {leaf} class {c}");
                }
                LeafPredictor::Scores(v) => {
                    let _ = write!(s, "leaf {leaf} scores");
                    for x in v {
                        let _ = write!(s, " {x}");
                    }
                    s.push('\n');
                }
            }
        }
        s.push_str("end\n");
    }
    let digest = hex::encode(Sha256::digest(s.as_bytes()));
    s.push_str(CHECKSUM_HEADER);
    let _ = writeln!(s, "sha256={digest}");
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

fn parse<T: std::str::FromStr>(what: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(format!("bad {what}: {v:?}")))
}

fn parse_node(v: &str) -> Result<NodeId> {
    NodeId::new(parse("node label", v)?).ok_or_else(|| bad(format!("bad node label {v:?}")))
}

pub fn deserialize(text: &str) -> Result<ForestModel> {
    let split = text.rfind(CHECKSUM_HEADER).ok_or_else(|| bad("missing [checksum] section"))?;
    let (body, tail) = text.split_at(split);
    let expected = tail[CHECKSUM_HEADER.len()..]
        .trim_end()
        .strip_prefix("sha256=")
        .ok_or_else(|| bad("missing sha256 line"))?;
    let found = hex::encode(Sha256::digest(body.as_bytes()));
    if found != expected {
        return Err(Error::Checksum { expected: expected.to_string(), found });
    }

    let mut lines = body.lines();
    if lines.next() != Some("[meta]") {
        return Err(bad("expected [meta]"));
    }
    let mut meta: HashMap<&str, &str> = HashMap::new();
    let mut accounting: HashMap<&str, &str> = HashMap::new();
    let mut section = &mut meta;
    let mut in_meta = true;
    let mut tree_lines = Vec::new();
    for line in lines.by_ref() {
        match line {
            "[accounting]" if in_meta => {
                section = &mut accounting;
                in_meta = false;
            }
            "[trees]" => break,
            _ => {
                let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
                section.insert(k, v);
            }
        }
    }
    tree_lines.extend(lines);

    let version: u32 = parse("version", meta.get("version").ok_or_else(|| bad("missing version"))?)?;
    if version != MODEL_VERSION {
        return Err(Error::Version(version));
    }
    let seed: u64 = parse("seed", meta.get("seed").ok_or_else(|| bad("missing seed"))?)?;
    let schema = FeatureSchema::from_json(meta.get("schema").ok_or_else(|| bad("missing schema"))?)?;
    if meta.get("schema_hash") != Some(&schema.hash().as_str()) {
        return Err(bad("schema hash does not match the schema"));
    }
    let transcript = AccountingTranscript::from_fields(|k| accounting.get(k).copied())?;

    let mut trees = Vec::new();
    let mut it = tree_lines.into_iter().peekable();
    while let Some(line) = it.next() {
        let idx: usize = parse("tree index", line.strip_prefix("tree ").ok_or_else(|| bad(format!("expected tree, got {line:?}")))?)?;
        if idx != trees.len() {
            return Err(bad(format!("tree {idx} out of order")));
        }
        let heavy_line = it.next().ok_or_else(|| bad("missing heavy line"))?;
        let mut words = heavy_line.split(' ');
        if words.next() != Some("heavy") {
            return Err(bad("expected heavy line"));
        }
        let heavy = HeavySet::from_sorted(words.filter(|w| !w.is_empty()).map(parse_node).collect::<Result<_>>()?)?;
        let mut rules = Vec::with_capacity(heavy.len());
        let mut leaves = Vec::new();
        let mut predictors = Vec::new();
        loop {
            let line = it.next().ok_or_else(|| bad("unterminated tree"))?;
            if line == "end" {
                break;
            }
            let w: Vec<&str> = line.split(' ').collect();
            match w.as_slice() {
                ["rule", label, kind, feature, param] => {
                    let label = parse_node(label)?;
                    if heavy.labels().get(rules.len()) != Some(&label) {
                        return Err(bad(format!("rule for {label} is not for the next Heavy node")));
                    }
                    rules.push(match *kind {
                        "threshold" => Some(SplitRule::numeric(parse("feature", feature)?, parse("threshold", param)?)),
                        "category" => Some(SplitRule::category(parse("feature", feature)?, parse("category", param)?)),
                        "forced" => None,
                        _ => return Err(bad(format!("unknown rule kind {kind:?}"))),
                    });
                }
                ["leaf", label, "class", c] => {
                    leaves.push(parse_node(label)?);
                    predictors.push(LeafPredictor::Class(parse("class", c)?));
                }
                ["leaf", label, "scores", rest @ ..] => {
                    leaves.push(parse_node(label)?);
                    predictors.push(LeafPredictor::Scores(rest.iter().map(|v| parse("score", v)).collect::<Result<_>>()?));
                }
                _ => return Err(bad(format!("unexpected line {line:?}"))),
            }
        }
        let tree = PrunedTree::new(heavy, rules, leaves, predictors).map_err(|e| bad(e.to_string()))?;
        check_rules(&tree, &schema)?;
        trees.push(tree);
    }
    ForestModel::new(schema, seed, transcript, trees).map_err(|e| bad(e.to_string()))
}

fn check_rules(tree: &PrunedTree, schema: &FeatureSchema) -> Result<()> {
    for rule in tree.rules().iter().flatten() {
        let f = rule.feature as usize;
        if f >= schema.num_features() {
            return Err(bad(format!("rule feature {f} out of range")));
        }
        let spec = schema.feature(f);
        let ok = match rule.kind {
            SplitKind::Threshold(t) => spec.is_numeric() && t.is_finite(),
            SplitKind::CategoryIs(c) => match &spec.kind {
                crate::tree::FeatureKind::Categorical { domain } => (c as usize) < domain.len(),
                _ => false,
            },
        };
        if !ok {
            return Err(bad(format!("rule does not fit feature {:?}", spec.name)));
        }
    }
    Ok(())
}

pub fn save_model(path: impl AsRef<Path>, model: &ForestModel) -> Result<()> {
    std::fs::write(path, serialize(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForestModel> {
    deserialize(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_moons;
    use crate::forest::{predict, train, TrainConfig};
    use crate::privacy::{EpsilonDelta, LeafMechanismKind};

    fn model(leaf: LeafMechanismKind) -> ForestModel {
        let (s, d) = gen_moons(800, (5.0, 4.0), 5);
        let cfg = TrainConfig::new(EpsilonDelta::new(2.0, 1e-6).unwrap()).with_trees(5).with_depth(30).with_leaf(leaf);
        train(&d, &s, &cfg).unwrap()
    }

    #[test]
    fn roundtrip_is_identity() {
        for leaf in [LeafMechanismKind::ExponentialMajority, LeafMechanismKind::GaussianCounts] {
            let m = model(leaf);
            let text = serialize(&m);
            let back = deserialize(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn tampered_transcript_fails_checksum() {
        let text = serialize(&model(LeafMechanismKind::ExponentialMajority));
        let tampered = text.replacen("eps2=0.5", "eps2=0.6", 1);
        assert_ne!(tampered, text);
        assert!(matches!(deserialize(&tampered), Err(Error::Checksum { .. })));
    }

    #[test]
    fn version_mismatch() {
        let text = serialize(&model(LeafMechanismKind::ExponentialMajority));
        let body = text[..text.rfind(CHECKSUM_HEADER).unwrap()].replacen("version=1", "version=2", 1);
        let forged = format!("{body}{CHECKSUM_HEADER}sha256={}\n", hex::encode(Sha256::digest(body.as_bytes())));
        assert!(matches!(deserialize(&forged), Err(Error::Version(2))));
    }

    #[test]
    fn predictions_survive_roundtrip() {
        let m = model(LeafMechanismKind::GaussianCounts);
        let back = deserialize(&serialize(&m)).unwrap();
        let (_, d) = gen_moons(300, (5.0, 4.0), 99);
        for i in 0..d.len() {
            assert_eq!(predict(&m, &d.row(i)), predict(&back, &d.row(i)));
        }
    }
}
