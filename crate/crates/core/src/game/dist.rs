use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::{sum, ActionProfile, GameError, PlayerId, StrategicGame};
use crate::Rational;

/// Whether a distribution is declared to be a product of independent marginals
/// (a mixed profile) or an arbitrary joint distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistKind {
    Product,
    Joint,
}

/// A finitely supported probability distribution over action profiles with
/// exact rational weights. Support is kept sorted and free of zero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileDistribution {
    kind: DistKind,
    support: Vec<(ActionProfile, Rational)>,
}

impl ProfileDistribution {
    /// A joint distribution. Duplicate profiles are merged.
    pub fn joint<I>(entries: I) -> Result<Self, GameError>
    where
        I: IntoIterator<Item = (ActionProfile, Rational)>,
    {
        Self::build(entries, DistKind::Joint)
    }

    /// A distribution with an explicit kind. Product kind is checked to factor.
    pub fn with_kind<I>(entries: I, kind: DistKind) -> Result<Self, GameError>
    where
        I: IntoIterator<Item = (ActionProfile, Rational)>,
    {
        let dist = Self::build(entries, DistKind::Joint)?;
        match kind {
            DistKind::Joint => Ok(dist),
            DistKind::Product => {
                if dist.factors() {
                    Ok(ProfileDistribution {
                        kind: DistKind::Product,
                        ..dist
                    })
                } else {
                    Err(GameError::NotProduct)
                }
            }
        }
    }

    /// The product of independent per-player mixtures.
    pub fn product(marginals: &[Vec<Rational>]) -> Result<Self, GameError> {
        let mut support: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), Rational::one())];
        for m in marginals {
            if m.iter().any(Signed::is_negative) {
                return Err(GameError::NegativeProbability);
            }
            let total = sum(m);
            if !total.is_one() {
                return Err(GameError::NotNormalized(total));
            }
            let mut next = Vec::new();
            for (prefix, w) in &support {
                for (a, pa) in m.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
                    let mut prof = prefix.clone();
                    prof.push(a);
                    next.push((prof, w * pa));
                }
            }
            support = next;
        }
        let mut dist = Self::build(
            support.into_iter().map(|(p, w)| (ActionProfile(p), w)),
            DistKind::Joint,
        )?;
        dist.kind = DistKind::Product;
        Ok(dist)
    }

    /// The point mass on `profile` (a pure profile, hence product).
    pub fn point(profile: ActionProfile) -> Self {
        ProfileDistribution {
            kind: DistKind::Product,
            support: vec![(profile, Rational::one())],
        }
    }

    /// The uniform distribution over the given (distinct) profiles.
    pub fn uniform(profiles: Vec<ActionProfile>) -> Result<Self, GameError> {
        if profiles.is_empty() {
            return Err(GameError::EmptySupport);
        }
        let w = Rational::new(1.into(), profiles.len().into());
        Self::joint(profiles.into_iter().map(|p| (p, w.clone())))
    }

    fn build<I>(entries: I, kind: DistKind) -> Result<Self, GameError>
    where
        I: IntoIterator<Item = (ActionProfile, Rational)>,
    {
        let mut merged: BTreeMap<ActionProfile, Rational> = BTreeMap::new();
        let mut width = None;
        for (p, w) in entries {
            if w.is_negative() {
                return Err(GameError::NegativeProbability);
            }
            match width {
                None => width = Some(p.len()),
                Some(n) if n != p.len() => return Err(GameError::ProfileOutOfRange(p.0)),
                _ => {}
            }
            *merged.entry(p).or_insert_with(Rational::zero) += w;
        }
        let support: Vec<_> = merged.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        if support.is_empty() {
            return Err(GameError::EmptySupport);
        }
        let total = sum(support.iter().map(|(_, w)| w));
        if !total.is_one() {
            return Err(GameError::NotNormalized(total));
        }
        Ok(ProfileDistribution { kind, support })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// Forgets the product declaration.
    pub fn into_joint(mut self) -> Self {
        self.kind = DistKind::Joint;
        self
    }

    pub fn support(&self) -> &[(ActionProfile, Rational)] {
        &self.support
    }

    pub fn num_players(&self) -> usize {
        self.support[0].0.len()
    }

    pub fn probability(&self, profile: &ActionProfile) -> Rational {
        self.support
            .binary_search_by(|(p, _)| p.cmp(profile))
            .map(|i| self.support[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Marginal of `player` as a map from action to probability.
    pub fn marginal_map(&self, player: PlayerId) -> BTreeMap<usize, Rational> {
        let mut out = BTreeMap::new();
        for (p, w) in &self.support {
            *out.entry(p.get(player)).or_insert_with(Rational::zero) += w;
        }
        out
    }

    /// Marginal of `player` as a dense vector of length `num_actions`.
    pub fn marginal(&self, player: PlayerId, num_actions: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); num_actions];
        for (a, w) in self.marginal_map(player) {
            out[a] = w;
        }
        out
    }

    /// True when the joint weights equal the product of their marginals.
    pub fn factors(&self) -> bool {
        let n = self.num_players();
        let marginals: Vec<_> = (0..n).map(|p| self.marginal_map(p)).collect();
        let product_size: usize = marginals.iter().map(BTreeMap::len).product();
        if product_size != self.support.len() {
            return false;
        }
        self.support.iter().all(|(p, w)| {
            let prod = (0..n).fold(Rational::one(), |acc, i| acc * &marginals[i][&p.get(i)]);
            prod == *w
        })
    }

    /// Fails unless every support profile belongs to `game`.
    pub fn check_domain(&self, game: &StrategicGame) -> Result<(), GameError> {
        for (p, _) in &self.support {
            game.check_profile(p)?;
        }
        Ok(())
    }

    /// The convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mixture(&self, other: &Self, lambda: &Rational) -> Result<Self, GameError> {
        let rest = Rational::one() - lambda;
        let entries = self
            .support
            .iter()
            .map(|(p, w)| (p.clone(), w * lambda))
            .chain(other.support.iter().map(|(p, w)| (p.clone(), w * &rest)));
        Self::joint(entries)
    }

    /// Pushes the distribution through a profile map.
    pub fn map_profiles<F>(&self, mut f: F) -> Result<Self, GameError>
    where
        F: FnMut(&ActionProfile) -> ActionProfile,
    {
        Self::joint(self.support.iter().map(|(p, w)| (f(p), w.clone())))
    }

    /// Draws one profile using exact integer sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &ActionProfile {
        let weights: Vec<&Rational> = self.support.iter().map(|(_, w)| w).collect();
        let i = crate::sample_index(&weights, rng);
        &self.support[i].0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    fn ap(v: &[usize]) -> ActionProfile {
        ActionProfile(v.to_vec())
    }

    #[test]
    fn merges_and_validates() {
        let d = ProfileDistribution::joint(vec![
            (ap(&[0, 0]), ratio(1, 4)),
            (ap(&[1, 1]), ratio(1, 2)),
            (ap(&[0, 0]), ratio(1, 4)),
        ])
        .unwrap();
        assert_eq!(d.support().len(), 2);
        assert_eq!(d.probability(&ap(&[0, 0])), ratio(1, 2));
        assert_eq!(d.probability(&ap(&[0, 1])), ratio(0, 1));
        assert!(matches!(
            ProfileDistribution::joint(vec![(ap(&[0]), ratio(1, 3))]),
            Err(GameError::NotNormalized(_))
        ));
        assert!(matches!(
            ProfileDistribution::joint(vec![(ap(&[0]), ratio(-1, 3)), (ap(&[1]), ratio(4, 3))]),
            Err(GameError::NegativeProbability)
        ));
    }

    #[test]
    fn product_detection() {
        let m = ProfileDistribution::product(&[
            vec![ratio(2, 7), ratio(5, 7)],
            vec![ratio(5, 7), ratio(2, 7)],
        ])
        .unwrap();
        assert_eq!(m.kind(), DistKind::Product);
        assert!(m.factors());
        let corr = ProfileDistribution::uniform(vec![ap(&[0, 0]), ap(&[1, 1])]).unwrap();
        assert!(!corr.factors());
        assert!(matches!(
            ProfileDistribution::with_kind(corr.support().to_vec(), DistKind::Product),
            Err(GameError::NotProduct)
        ));
        assert_eq!(m.marginal(1, 2), vec![ratio(5, 7), ratio(2, 7)]);
    }
}
