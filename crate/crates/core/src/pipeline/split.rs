//! Seeded, label-stratified train/test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fusion::Label;

/// Shuffles each class with `seed`, sends `round(ratio * n_c)` of class
/// `c` to the training side (at least one per side), then shuffles both
/// sides. Every class needs at least two examples.
pub fn split<T>(examples: Vec<T>, ratio: f64, seed: u64, label: impl Fn(&T) -> Label) -> Result<(Vec<T>, Vec<T>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<T>; 2] = [Vec::new(), Vec::new()];
    for e in examples {
        by_class[label(&e) as usize].push(e);
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (c, mut group) in by_class.into_iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        if group.len() < 2 {
            let name = if c == 1 { Label::Positive } else { Label::Negative };
            return Err(Error::InvalidArgument(format!(
                "class {name} has {} example(s); a split needs at least 2",
                group.len()
            )));
        }
        group.shuffle(&mut rng);
        let n = group.len();
        let k = ((ratio * n as f64).round() as usize).clamp(1, n - 1);
        let rest = group.split_off(k);
        train.extend(group);
        test.extend(rest);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(pos: usize, neg: usize) -> Vec<(usize, Label)> {
        (0..pos)
            .map(|i| (i, Label::Positive))
            .chain((0..neg).map(|i| (pos + i, Label::Negative)))
            .collect()
    }

    fn count(v: &[(usize, Label)], l: Label) -> usize {
        v.iter().filter(|x| x.1 == l).count()
    }

    #[test]
    fn eighty_twenty() {
        let (tr, te) = split(items(5, 5), 0.8, 1, |x| x.1).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        assert_eq!(count(&tr, Label::Positive), 4);
        assert_eq!(count(&te, Label::Positive), 1);
    }

    #[test]
    fn deterministic_and_exhaustive() {
        let a = split(items(30, 70), 0.8, 9, |x| x.1).unwrap();
        assert_eq!(a, split(items(30, 70), 0.8, 9, |x| x.1).unwrap());
        assert_ne!(a, split(items(30, 70), 0.8, 10, |x| x.1).unwrap());
        let mut ids: Vec<usize> = a.0.iter().chain(&a.1).map(|x| x.0).collect();
        ids.sort();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
        assert_eq!(count(&a.0, Label::Positive), 24);
    }

    #[test]
    fn tiny_class_rejected() {
        assert!(split(items(1, 9), 0.8, 0, |x| x.1).is_err());
        assert!(split(items(5, 5), 1.0, 0, |x| x.1).is_err());
    }
}
