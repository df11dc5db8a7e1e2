use rand::Rng;

use super::schema::{FeatureKind, FeatureSchema};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitKind {
    /// Left iff value ≤ t.
    Threshold(f64),
    /// Left iff the value is category `c`.
    CategoryIs(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRule {
    pub feature: u32,
    pub kind: SplitKind,
}

impl SplitRule {
    pub fn numeric(feature: u32, t: f64) -> Self {
        SplitRule { feature, kind: SplitKind::Threshold(t) }
    }

    pub fn category(feature: u32, c: u32) -> Self {
        SplitRule { feature, kind: SplitKind::CategoryIs(c) }
    }

    pub fn goes_left_numeric(&self, v: f64) -> bool {
        match self.kind {
            SplitKind::Threshold(t) => v <= t,
            SplitKind::CategoryIs(_) => panic!("numeric value for categorical split"),
        }
    }

    pub fn goes_left_category(&self, c: u32) -> bool {
        match self.kind {
            SplitKind::CategoryIs(x) => c == x,
            SplitKind::Threshold(_) => panic!("category for numeric split"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DrawOutcome {
    Split(SplitRule),
    ForcedLeaf,
}

#[derive(Debug, Clone)]
enum FeatureState {
    Range { lower: f64, upper: f64 },
    Used { used: Vec<bool>, remaining: usize },
}

/// Per-feature constraints accumulated along a root-to-node path.
#[derive(Debug, Clone)]
pub struct PathState {
    features: Vec<FeatureState>,
}

/// Undo record returned by [`PathState::descend`].
#[derive(Debug, Clone, Copy)]
pub struct Undo {
    feature: u32,
    prev: Prev,
}

#[derive(Debug, Clone, Copy)]
enum Prev {
    Range(f64, f64),
    Category(u32),
}

impl PathState {
    pub fn root(schema: &FeatureSchema) -> Self {
        let features = schema
            .features()
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Numeric { lower, upper } => FeatureState::Range { lower: *lower, upper: *upper },
                FeatureKind::Categorical { domain } => {
                    FeatureState::Used { used: vec![false; domain.len()], remaining: domain.len() }
                }
            })
            .collect();
        PathState { features }
    }

    /// Current numeric range of `feature`.
    pub fn range(&self, feature: usize) -> Option<(f64, f64)> {
        match self.features[feature] {
            FeatureState::Range { lower, upper } => Some((lower, upper)),
            FeatureState::Used { .. } => None,
        }
    }

    pub fn is_used(&self, feature: usize, category: u32) -> bool {
        match &self.features[feature] {
            FeatureState::Used { used, .. } => used[category as usize],
            FeatureState::Range { .. } => false,
        }
    }

    pub fn is_splittable(&self, feature: usize) -> bool {
        match self.features[feature] {
            FeatureState::Range { lower, upper } => lower.next_up() < upper,
            FeatureState::Used { remaining, .. } => remaining > 0,
        }
    }

    /// Applies `rule` for the left or right child.
    pub fn descend(&mut self, rule: &SplitRule, left: bool) -> Undo {
        let feature = rule.feature;
        let prev = match (&mut self.features[feature as usize], rule.kind) {
            (FeatureState::Range { lower, upper }, SplitKind::Threshold(t)) => {
                let prev = Prev::Range(*lower, *upper);
                if left {
                    *upper = t;
                } else {
                    *lower = t;
                }
                prev
            }
            (FeatureState::Used { used, remaining }, SplitKind::CategoryIs(c)) => {
                debug_assert!(!used[c as usize]);
                used[c as usize] = true;
                *remaining -= 1;
                Prev::Category(c)
            }
            _ => panic!("split kind does not match feature {feature}"),
        };
        Undo { feature, prev }
    }

    pub fn undo(&mut self, undo: Undo) {
        match (&mut self.features[undo.feature as usize], undo.prev) {
            (FeatureState::Range { lower, upper }, Prev::Range(l, u)) => {
                *lower = l;
                *upper = u;
            }
            (FeatureState::Used { used, remaining }, Prev::Category(c)) => {
                used[c as usize] = false;
                *remaining += 1;
            }
            _ => unreachable!(),
        }
    }
}

const MAX_THRESHOLD_TRIES: usize = 64;

/// Draws a split for a node with the given path constraints. The feature is
/// uniform over splittable features; a numeric threshold is uniform on the
/// open range; a category is uniform over those unused on the path.
pub fn draw_split<R: Rng + ?Sized>(state: &PathState, rng: &mut R) -> DrawOutcome {
    let splittable: Vec<usize> = (0..state.features.len()).filter(|&f| state.is_splittable(f)).collect();
    if splittable.is_empty() {
        return DrawOutcome::ForcedLeaf;
    }
    let f = splittable[rng.random_range(0..splittable.len())];
    let rule = match &state.features[f] {
        FeatureState::Range { lower, upper } => SplitRule::numeric(f as u32, draw_threshold(*lower, *upper, rng)),
        FeatureState::Used { used, remaining } => {
            let pick = rng.random_range(0..*remaining);
            let c = used.iter().enumerate().filter(|(_, u)| !**u).nth(pick).map(|(i, _)| i).unwrap();
            SplitRule::category(f as u32, c as u32)
        }
    };
    DrawOutcome::Split(rule)
}

fn draw_threshold<R: Rng + ?Sized>(lower: f64, upper: f64, rng: &mut R) -> f64 {
    for _ in 0..MAX_THRESHOLD_TRIES {
        let u: f64 = rng.random();
        let t = lower + (upper - lower) * u;
        if lower < t && t < upper {
            return t;
        }
    }
    let mid = lower + (upper - lower) / 2.0;
    if lower < mid && mid < upper {
        mid
    } else {
        lower.next_up()
    }
}
