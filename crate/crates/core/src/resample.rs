//! Synthetic-sample selection and classical resampling baselines: random
//! oversampling, SMOTE, and Borderline-SMOTE (borderline-1).
//!
//! All resamplers operate on the preprocessed feature space and balance the
//! minority up to the majority count. Nearest neighbors are exact
//! brute-force scans with (distance, index) ordering, so results are
//! deterministic given the seed.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionVariant {
    /// Keep scores ≤ p_max, best-scored first.
    UpperBound,
    /// Keep the scores nearest to p_max on either side.
    ClosestToPmax,
}

/// Parameters of the synthetic-sample selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Score cut-off in [0, 1].
    pub p_max: f64,
    /// Sample budget as a multiple of the minority count.
    pub s: f64,
    pub variant: SelectionVariant,
}

impl SelectionConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(Error::InvalidConfig(format!(
                "p_max {} must lie in [0, 1]",
                self.p_max
            )));
        }
        if !self.s.is_finite() || self.s <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "selection budget s = {} must be positive and finite",
                self.s
            )));
        }
        Ok(())
    }
}

/// Candidate synthetic rows with their minority-likelihood scores.
#[derive(Debug, Clone)]
pub struct ScoredSamples {
    pub rows: Array2<f64>,
    pub scores: Vec<f64>,
}

impl ScoredSamples {
    pub fn new(rows: Array2<f64>, scores: Vec<f64>) -> Result<Self> {
        if rows.nrows() != scores.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows but {} scores",
                rows.nrows(),
                scores.len()
            )));
        }
        Ok(ScoredSamples { rows, scores })
    }
}

/// A dataset plus accepted synthetic minority rows (labelled y = 1).
#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    pub base: Dataset,
    pub x_selected: Array2<f64>,
    /// Source row index in `base` per synthetic row; None for methods whose
    /// samples have no single source row.
    pub provenance: Option<Vec<usize>>,
    /// Set when a method had to fall back (e.g. Borderline-SMOTE with an
    /// empty DANGER set).
    pub warning: Option<String>,
}

impl AugmentedDataset {
    /// Stacked (x, y) training matrices: base rows then synthetic rows.
    pub fn training_matrices(&self) -> (Array2<f64>, Vec<u8>) {
        let x = ndarray::concatenate(Axis(0), &[self.base.x.view(), self.x_selected.view()])
            .expect("widths checked at construction");
        let mut y = self.base.y.clone();
        y.extend(std::iter::repeat(1u8).take(self.x_selected.nrows()));
        (x, y)
    }

    pub fn synthetic_count(&self) -> usize {
        self.x_selected.nrows()
    }
}

/// Applies the selection rule and returns indices into the candidate rows.
///
/// `upper_bound`: keep rows with score ≤ p_max, sort by score descending,
/// truncate to ⌊s·minority_count⌋. `closest_to_pmax`: sort all rows by
/// |score − p_max| ascending and take the same count. Ties break by original
/// index ascending.
pub fn select(
    candidates: &ScoredSamples,
    config: &SelectionConfig,
    minority_count: usize,
) -> Result<Vec<usize>> {
    config.validate()?;
    if minority_count == 0 {
        return Err(Error::InvalidConfig("minority count must be >= 1".into()));
    }
    let budget = (config.s * minority_count as f64).floor() as usize;
    let mut order: Vec<usize> = match config.variant {
        SelectionVariant::UpperBound => {
            let mut kept: Vec<usize> = (0..candidates.scores.len())
                .filter(|&i| candidates.scores[i] <= config.p_max)
                .collect();
            kept.sort_by(|&a, &b| {
                candidates.scores[b]
                    .partial_cmp(&candidates.scores[a])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            kept
        }
        SelectionVariant::ClosestToPmax => {
            let mut all: Vec<usize> = (0..candidates.scores.len()).collect();
            all.sort_by(|&a, &b| {
                let da = (candidates.scores[a] - config.p_max).abs();
                let db = (candidates.scores[b] - config.p_max).abs();
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            });
            all
        }
    };
    order.truncate(budget);
    Ok(order)
}

/// Attaches synthetic rows (labelled minority) to a dataset.
pub fn augment(
    base: &Dataset,
    x_selected: Array2<f64>,
    provenance: Option<Vec<usize>>,
) -> Result<AugmentedDataset> {
    if x_selected.nrows() > 0 && x_selected.ncols() != base.n_features() {
        return Err(Error::ShapeMismatch(format!(
            "synthetic width {} != dataset width {}",
            x_selected.ncols(),
            base.n_features()
        )));
    }
    if let Some(p) = &provenance {
        if p.len() != x_selected.nrows() {
            return Err(Error::ShapeMismatch(
                "provenance length must match synthetic row count".into(),
            ));
        }
    }
    let x_selected = if x_selected.nrows() == 0 {
        Array2::zeros((0, base.n_features()))
    } else {
        x_selected
    };
    Ok(AugmentedDataset {
        base: base.clone(),
        x_selected,
        provenance,
        warning: None,
    })
}

/// Duplicates random minority rows until the classes are balanced.
pub fn random_oversample(d: &Dataset, seed: u64) -> Result<AugmentedDataset> {
    let (maj_idx, min_idx) = d.class_indices();
    if min_idx.is_empty() || maj_idx.is_empty() {
        return Err(Error::InvalidDataset("both classes must be nonempty".into()));
    }
    let needed = maj_idx.len().saturating_sub(min_idx.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Array2::zeros((needed, d.n_features()));
    let mut provenance = Vec::with_capacity(needed);
    for k in 0..needed {
        let pick = min_idx[rng.random_range(0..min_idx.len())];
        rows.row_mut(k).assign(&d.x.row(pick));
        provenance.push(pick);
    }
    augment(d, rows, Some(provenance))
}

/// Exact k-nearest minority neighbors of every minority row (excluding the
/// row itself), ordered by (distance, index).
fn minority_neighbors(x_min: &Array2<f64>, k: usize) -> Vec<Vec<usize>> {
    let n = x_min.nrows();
    let mut result = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d2 = x_min
                    .row(i)
                    .iter()
                    .zip(x_min.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d2, j)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        result.push(dists.into_iter().take(k).map(|(_, j)| j).collect());
    }
    result
}

fn interpolate_rows<R: Rng>(
    d: &Dataset,
    bases: &[usize],
    neighbors: &[Vec<usize>],
    min_idx: &[usize],
    needed: usize,
    rng: &mut R,
) -> (Array2<f64>, Vec<usize>) {
    let mut rows = Array2::zeros((needed, d.n_features()));
    let mut provenance = Vec::with_capacity(needed);
    for k in 0..needed {
        let base_pos = bases[rng.random_range(0..bases.len())];
        let nns = &neighbors[base_pos];
        let nn_pos = nns[rng.random_range(0..nns.len())];
        let u: f64 = rng.random::<f64>();
        let base_row = d.x.row(min_idx[base_pos]);
        let nn_row = d.x.row(min_idx[nn_pos]);
        for (c, out) in rows.row_mut(k).iter_mut().enumerate() {
            *out = base_row[c] + u * (nn_row[c] - base_row[c]);
        }
        provenance.push(min_idx[base_pos]);
    }
    (rows, provenance)
}

/// SMOTE: synthetic rows interpolate a minority row toward one of its k
/// nearest minority neighbors; enough rows are generated to balance classes.
pub fn smote(d: &Dataset, k: usize, seed: u64) -> Result<AugmentedDataset> {
    let (maj_idx, min_idx) = d.class_indices();
    if min_idx.len() < 2 {
        return Err(Error::InvalidDataset(
            "SMOTE needs at least 2 minority rows".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let x_min = d.x.select(Axis(0), &min_idx);
    let k_eff = k.min(min_idx.len() - 1);
    let neighbors = minority_neighbors(&x_min, k_eff);
    let needed = maj_idx.len().saturating_sub(min_idx.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases: Vec<usize> = (0..min_idx.len()).collect();
    let (rows, provenance) = interpolate_rows(d, &bases, &neighbors, &min_idx, needed, &mut rng);
    augment(d, rows, Some(provenance))
}

/// Borderline minority rows: those whose m-neighborhood (both classes)
/// contains at least m/2 but fewer than m majority rows.
fn danger_set(d: &Dataset, min_idx: &[usize], m: usize) -> Vec<usize> {
    let n = d.n_rows();
    let mut danger = Vec::new();
    for (pos, &i) in min_idx.iter().enumerate() {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d2 = d
                    .x
                    .row(i)
                    .iter()
                    .zip(d.x.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d2, j)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let majority_neighbors = dists
            .iter()
            .take(m)
            .filter(|(_, j)| d.y[*j] == 0)
            .count();
        if 2 * majority_neighbors >= m && majority_neighbors < m {
            danger.push(pos);
        }
    }
    danger
}

/// Borderline-SMOTE (borderline-1): interpolation bases are drawn only from
/// the DANGER set; partners are minority k-NN as in SMOTE. Falls back to
/// plain SMOTE with a warning when the DANGER set is empty.
pub fn borderline_smote(d: &Dataset, k: usize, m: usize, seed: u64) -> Result<AugmentedDataset> {
    let (maj_idx, min_idx) = d.class_indices();
    if min_idx.len() < 2 {
        return Err(Error::InvalidDataset(
            "Borderline-SMOTE needs at least 2 minority rows".into(),
        ));
    }
    if k == 0 || m == 0 {
        return Err(Error::InvalidConfig("k and m must be >= 1".into()));
    }
    let danger = danger_set(d, &min_idx, m);
    if danger.is_empty() {
        let mut augmented = smote(d, k, seed)?;
        augmented.warning =
            Some("empty DANGER set; fell back to plain SMOTE".to_string());
        return Ok(augmented);
    }
    let x_min = d.x.select(Axis(0), &min_idx);
    let k_eff = k.min(min_idx.len() - 1);
    let neighbors = minority_neighbors(&x_min, k_eff);
    let needed = maj_idx.len().saturating_sub(min_idx.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, provenance) = interpolate_rows(d, &danger, &neighbors, &min_idx, needed, &mut rng);
    augment(d, rows, Some(provenance))
}

/// Writes synthetic rows as TSV with a source-row provenance column.
pub fn write_selected_tsv<W: std::io::Write>(
    augmented: &AugmentedDataset,
    mut w: W,
) -> std::io::Result<()> {
    let width = augmented.x_selected.ncols();
    for c in 0..width {
        write!(w, "f{c}\t")?;
    }
    writeln!(w, "source_row")?;
    for (r, row) in augmented.x_selected.axis_iter(Axis(0)).enumerate() {
        for v in row.iter() {
            write!(w, "{v}\t")?;
        }
        match &augmented.provenance {
            Some(p) => writeln!(w, "{}", p[r])?,
            None => writeln!(w, "-")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn scored(scores: &[f64]) -> ScoredSamples {
        let rows = Array2::from_shape_fn((scores.len(), 2), |(i, j)| (i * 2 + j) as f64);
        ScoredSamples::new(rows, scores.to_vec()).unwrap()
    }

    /// Brute-force filter/sort/truncate oracle for both variants.
    fn select_oracle(scores: &[f64], cfg: &SelectionConfig, minority: usize) -> Vec<usize> {
        let budget = (cfg.s * minority as f64).floor() as usize;
        let mut pairs: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
        match cfg.variant {
            SelectionVariant::UpperBound => {
                pairs.retain(|(_, s)| *s <= cfg.p_max);
                pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            }
            SelectionVariant::ClosestToPmax => {
                pairs.sort_by(|a, b| {
                    (a.1 - cfg.p_max)
                        .abs()
                        .partial_cmp(&(b.1 - cfg.p_max).abs())
                        .unwrap()
                        .then(a.0.cmp(&b.0))
                });
            }
        }
        pairs.into_iter().take(budget).map(|(i, _)| i).collect()
    }

    #[test]
    fn select_upper_bound_example() {
        let c = scored(&[0.95, 0.7, 0.6, 0.2]);
        let cfg = SelectionConfig {
            p_max: 0.8,
            s: 2.0,
            variant: SelectionVariant::UpperBound,
        };
        assert_eq!(select(&c, &cfg, 1).unwrap(), vec![1, 2]);
        assert_eq!(select_oracle(&c.scores, &cfg, 1), vec![1, 2]);
    }

    #[test]
    fn select_pmax_zero_keeps_nothing() {
        let c = scored(&[0.95, 0.7, 0.6, 0.2]);
        let cfg = SelectionConfig {
            p_max: 0.0,
            s: 4.0,
            variant: SelectionVariant::UpperBound,
        };
        assert!(select(&c, &cfg, 3).unwrap().is_empty());
    }

    #[test]
    fn select_closest_variant_example() {
        let c = scored(&[0.95, 0.7, 0.6, 0.2]);
        let cfg = SelectionConfig {
            p_max: 0.8,
            s: 2.0,
            variant: SelectionVariant::ClosestToPmax,
        };
        // distances: 0.15, 0.1, 0.2, 0.6 -> order 1, 0
        assert_eq!(select(&c, &cfg, 1).unwrap(), vec![1, 0]);
    }

    #[test]
    fn select_matches_oracle_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..120 {
            let n = rng.random_range(1..60);
            // Coarse scores force ties.
            let scores: Vec<f64> = (0..n)
                .map(|_| (rng.random::<f64>() * 8.0).round() / 8.0)
                .collect();
            let minority = rng.random_range(1..10usize);
            for variant in [SelectionVariant::UpperBound, SelectionVariant::ClosestToPmax] {
                let cfg = SelectionConfig {
                    p_max: (rng.random::<f64>() * 8.0).round() / 8.0,
                    s: rng.random::<f64>() * 4.0 + 0.1,
                    variant,
                };
                let c = scored(&scores);
                assert_eq!(
                    select(&c, &cfg, minority).unwrap(),
                    select_oracle(&scores, &cfg, minority),
                    "variant {variant:?} cfg {cfg:?} scores {scores:?}"
                );
            }
        }
    }

    fn toy_imbalanced(n_maj: usize, n_min: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n_maj + n_min;
        let x = Array2::from_shape_fn((n, 2), |(i, _)| {
            if i < n_maj {
                rng.random::<f64>()
            } else {
                rng.random::<f64>() + 3.0
            }
        });
        let mut y = vec![0u8; n_maj];
        y.extend(vec![1u8; n_min]);
        Dataset::from_matrix("toy", x, y).unwrap()
    }

    #[test]
    fn random_oversample_balances_with_copies() {
        let d = toy_imbalanced(28, 4, 3);
        let aug = random_oversample(&d, 9).unwrap();
        assert_eq!(aug.synthetic_count(), 24);
        let (x, y) = aug.training_matrices();
        let n_min: usize = y.iter().filter(|&&l| l == 1).count();
        assert_eq!(n_min, 28);
        assert_eq!(x.nrows(), 56);

        // Every synthetic row is an exact copy of some original minority row.
        let min_rows: Vec<Vec<f64>> = d
            .class_indices()
            .1
            .iter()
            .map(|&i| d.x.row(i).to_vec())
            .collect();
        for row in aug.x_selected.axis_iter(Axis(0)) {
            assert!(min_rows.contains(&row.to_vec()));
        }

        // Balanced input: nothing added.
        let balanced = toy_imbalanced(5, 5, 1);
        assert_eq!(random_oversample(&balanced, 0).unwrap().synthetic_count(), 0);
    }

    #[test]
    fn smote_interpolates_on_segments() {
        // Minority = {(0,0), (1,1)}; every synthetic point lies on the segment.
        let x = array![
            [10.0, 10.0],
            [11.0, 11.0],
            [12.0, 10.5],
            [10.5, 12.0],
            [0.0, 0.0],
            [1.0, 1.0]
        ];
        let d = Dataset::from_matrix("seg", x, vec![0, 0, 0, 0, 1, 1]).unwrap();
        let aug = smote(&d, 1, 5).unwrap();
        assert_eq!(aug.synthetic_count(), 2);
        for row in aug.x_selected.axis_iter(Axis(0)) {
            let t = row[0];
            assert!((row[1] - t).abs() < 1e-12, "off the segment: {row:?}");
            assert!((0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn smote_synthetic_rows_are_convex_combinations_of_knn_pairs() {
        let d = toy_imbalanced(40, 8, 11);
        let k = 3;
        let aug = smote(&d, k, 21).unwrap();
        let (_, min_idx) = d.class_indices();
        let x_min = d.x.select(Axis(0), &min_idx);
        let neighbors = minority_neighbors(&x_min, k);

        for (r, row) in aug.x_selected.axis_iter(Axis(0)).enumerate() {
            let base_global = aug.provenance.as_ref().unwrap()[r];
            let base_pos = min_idx.iter().position(|&i| i == base_global).unwrap();
            // The synthetic row must lie on the segment from the base to one
            // of its k nearest minority neighbors (exhaustive k-NN oracle).
            let base = d.x.row(base_global);
            let found = neighbors[base_pos].iter().any(|&nn_pos| {
                let nn = x_min.row(nn_pos);
                // Solve for u from the first differing coordinate, then check.
                let mut u = None;
                for c in 0..d.n_features() {
                    let denom = nn[c] - base[c];
                    if denom.abs() > 1e-12 {
                        u = Some((row[c] - base[c]) / denom);
                        break;
                    }
                }
                let u = match u {
                    Some(u) => u,
                    None => return row == base,
                };
                if !(-1e-9..=1.0 + 1e-9).contains(&u) {
                    return false;
                }
                (0..d.n_features())
                    .all(|c| (row[c] - (base[c] + u * (nn[c] - base[c]))).abs() < 1e-9)
            });
            assert!(found, "row {r} is not on a base->kNN segment");
        }
    }

    #[test]
    fn smote_single_minority_row_errors() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]];
        let d = Dataset::from_matrix("t", x, vec![0, 0, 1]).unwrap();
        assert!(smote(&d, 5, 0).is_err());
    }

    /// Brute-force DANGER classification oracle.
    fn danger_oracle(d: &Dataset, m: usize) -> Vec<usize> {
        let (_, min_idx) = d.class_indices();
        let mut danger = Vec::new();
        for (pos, &i) in min_idx.iter().enumerate() {
            let mut all: Vec<(f64, usize)> = (0..d.n_rows())
                .filter(|&j| j != i)
                .map(|j| {
                    let dist = d
                        .x
                        .row(i)
                        .iter()
                        .zip(d.x.row(j).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>();
                    (dist, j)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let maj = all.iter().take(m).filter(|(_, j)| d.y[*j] == 0).count();
            if maj as f64 >= m as f64 / 2.0 && maj < m {
                danger.push(pos);
            }
        }
        danger
    }

    #[test]
    fn borderline_smote_bases_come_from_danger_set() {
        // Boundary minority: three tight pairs embedded in the majority cloud
        // (each point sees its twin plus majority neighbors). Interior
        // minority: a tight 8-point cluster far away with all-minority
        // neighborhoods.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rows: Vec<[f64; 2]> = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..60 {
            rows.push([rng.random::<f64>(), rng.random::<f64>()]);
            labels.push(0u8);
        }
        for center in [[0.3, 0.3], [0.6, 0.5], [0.4, 0.7]] {
            for offset in [-0.004, 0.004] {
                rows.push([center[0] + offset, center[1] + offset]);
                labels.push(1u8);
            }
        }
        for _ in 0..8 {
            rows.push([
                30.0 + rng.random::<f64>() * 0.1,
                30.0 + rng.random::<f64>() * 0.1,
            ]);
            labels.push(1u8);
        }
        let x = Array2::from_shape_fn((rows.len(), 2), |(i, j)| rows[i][j]);
        let d = Dataset::from_matrix("clusters", x, labels).unwrap();

        let m = 7;
        let danger = danger_set(&d, &d.class_indices().1, m);
        assert_eq!(danger, danger_oracle(&d, m));
        // Exactly the boundary pairs (positions 0..6 of the minority).
        assert_eq!(danger, vec![0, 1, 2, 3, 4, 5]);

        let aug = borderline_smote(&d, 3, m, 4).unwrap();
        assert!(aug.warning.is_none());
        let (_, min_idx) = d.class_indices();
        let danger_global: Vec<usize> = danger.iter().map(|&p| min_idx[p]).collect();
        for src in aug.provenance.as_ref().unwrap() {
            assert!(danger_global.contains(src), "base {src} outside DANGER");
        }
    }

    #[test]
    fn borderline_smote_falls_back_when_no_danger() {
        // Minority far from majority: all-minority neighborhoods, no DANGER.
        let d = toy_imbalanced(30, 5, 6);
        let aug = borderline_smote(&d, 2, 5, 8).unwrap();
        assert!(aug.warning.is_some());
        assert_eq!(aug.synthetic_count(), 25);
    }

    #[test]
    fn resamplers_are_deterministic() {
        let d = toy_imbalanced(25, 5, 13);
        for f in [
            |d: &Dataset| random_oversample(d, 7).unwrap().x_selected,
            |d: &Dataset| smote(d, 3, 7).unwrap().x_selected,
            |d: &Dataset| borderline_smote(d, 3, 5, 7).unwrap().x_selected,
        ] {
            assert_eq!(f(&d), f(&d));
        }
    }

    #[test]
    fn augment_contract() {
        let d = toy_imbalanced(6, 3, 0);
        let empty = augment(&d, Array2::zeros((0, 2)), None).unwrap();
        let (x, y) = empty.training_matrices();
        assert_eq!(x, d.x);
        assert_eq!(y, d.y);

        let extra = array![[9.0, 9.0], [8.0, 8.0]];
        let aug = augment(&d, extra, None).unwrap();
        let (x2, y2) = aug.training_matrices();
        assert_eq!(y2.iter().filter(|&&l| l == 1).count(), 5);
        assert_eq!(x2.nrows(), 11);
        // Base rows unchanged.
        assert_eq!(x2.slice(ndarray::s![..9, ..]), d.x);

        let wrong = Array2::zeros((1, 5));
        assert!(augment(&d, wrong, None).is_err());
    }
}
