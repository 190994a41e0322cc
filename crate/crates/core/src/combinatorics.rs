//! Headway combinations over a route's patterns, their perceived headway and
//! the frequency-share split of boarding riders.

use std::collections::HashMap;

use crate::error::CombinationError;
use crate::network::Minutes;

/// One headway index per pattern: `0` is out of service, `k >= 1` picks the
/// `k`-th menu entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub headway_indices: Vec<usize>,
    pub perceived_headway: Minutes,
}

impl Combination {
    pub fn new(headway_indices: Vec<usize>, menu: &[Minutes]) -> Result<Self, CombinationError> {
        let perceived_headway = perceived_headway(&headway_indices, menu)?;
        Ok(Self {
            headway_indices,
            perceived_headway,
        })
    }

    pub fn is_active(&self, pattern: usize) -> bool {
        self.headway_indices[pattern] != 0
    }

    pub fn active_patterns(&self) -> impl Iterator<Item = usize> + '_ {
        self.headway_indices
            .iter()
            .enumerate()
            .filter(|(_, &h)| h != 0)
            .map(|(p, _)| p)
    }

    pub fn n_active(&self) -> usize {
        self.headway_indices.iter().filter(|&&h| h != 0).count()
    }
}

/// All combinations of one (route, period), in lexicographic order.
#[derive(Debug, Clone)]
pub struct CombinationSet {
    combos: Vec<Combination>,
    index: HashMap<Vec<usize>, usize>,
}

impl CombinationSet {
    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    pub fn get(&self, c: usize) -> &Combination {
        &self.combos[c]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Combination> {
        self.combos.iter()
    }

    pub fn position(&self, headway_indices: &[usize]) -> Option<usize> {
        self.index.get(headway_indices).copied()
    }
}

impl<'a> IntoIterator for &'a CombinationSet {
    type Item = &'a Combination;
    type IntoIter = std::slice::Iter<'a, Combination>;

    fn into_iter(self) -> Self::IntoIter {
        self.combos.iter()
    }
}

pub fn enumerate_combinations(
    n_patterns: usize,
    menu: &[Minutes],
) -> Result<CombinationSet, CombinationError> {
    if menu.is_empty() {
        return Err(CombinationError::EmptyMenu);
    }
    if n_patterns == 0 {
        return Err(CombinationError::NoPatterns);
    }
    let base = menu.len() + 1;
    let total = base.pow(n_patterns as u32);
    let mut combos = Vec::with_capacity(total - 1);
    let mut index = HashMap::with_capacity(total - 1);
    let mut digits = vec![0usize; n_patterns];
    // Odometer over {0..=|menu|}^n; the first vector is all zeros and skipped.
    for _ in 1..total {
        for pos in (0..n_patterns).rev() {
            digits[pos] += 1;
            if digits[pos] < base {
                break;
            }
            digits[pos] = 0;
        }
        index.insert(digits.clone(), combos.len());
        combos.push(Combination::new(digits.clone(), menu)?);
    }
    Ok(CombinationSet { combos, index })
}

/// Harmonic combination of the active patterns' headways.
pub fn perceived_headway(headway_indices: &[usize], menu: &[Minutes]) -> Result<Minutes, CombinationError> {
    let mut frequency = 0.0;
    let mut active = Vec::new();
    for &h in headway_indices {
        if h == 0 {
            continue;
        }
        let headway = headway_value(h, menu)?;
        frequency += 1.0 / headway;
        active.push(headway);
    }
    match active[..] {
        [] => Err(CombinationError::AllOutOfService),
        // exact, no round trip through the reciprocal
        [only] => Ok(only),
        _ => Ok(1.0 / frequency),
    }
}

/// Share of boarding riders taking each pattern; zero for inactive patterns.
pub fn frequency_shares(headway_indices: &[usize], menu: &[Minutes]) -> Result<Vec<f64>, CombinationError> {
    let perceived = perceived_headway(headway_indices, menu)?;
    headway_indices
        .iter()
        .map(|&h| {
            if h == 0 {
                Ok(0.0)
            } else {
                Ok(perceived / headway_value(h, menu)?)
            }
        })
        .collect()
}

pub fn headway_value(index: usize, menu: &[Minutes]) -> Result<Minutes, CombinationError> {
    if index == 0 || index > menu.len() {
        return Err(CombinationError::IndexOutOfMenu {
            index,
            menu_len: menu.len(),
        });
    }
    Ok(menu[index - 1])
}
