use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("word has {available} symbol(s), {needed} needed")]
    InsufficientLength { needed: usize, available: usize },
    #[error("periodic tail is empty")]
    EmptyCycle,
}

/// An element of `D^N` given finitely: a head followed by a repeating block,
/// or a finite word when the block is empty. Symbols index the sponge's
/// sorted digit list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub head: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Word {
    pub fn finite(symbols: Vec<usize>) -> Self {
        Self {
            head: symbols,
            cycle: Vec::new(),
        }
    }

    pub fn periodic(head: Vec<usize>, cycle: Vec<usize>) -> Result<Self, WordError> {
        if cycle.is_empty() {
            return Err(WordError::EmptyCycle);
        }
        Ok(Self { head, cycle })
    }

    /// `(s, s, s, ...)`.
    pub fn constant(symbol: usize) -> Self {
        Self {
            head: Vec::new(),
            cycle: vec![symbol],
        }
    }

    pub fn is_infinite(&self) -> bool {
        !self.cycle.is_empty()
    }

    /// Number of available symbols, `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        (!self.is_infinite()).then_some(self.head.len())
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty() && self.cycle.is_empty()
    }

    pub fn symbol(&self, position: usize) -> Option<usize> {
        if position < self.head.len() {
            Some(self.head[position])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(position - self.head.len()) % self.cycle.len()])
        }
    }

    /// `omega|n`.
    pub fn prefix(&self, n: usize) -> Result<Vec<usize>, WordError> {
        self.ensure(n)?;
        Ok((0..n)
            .map(|i| self.symbol(i).expect("checked length"))
            .collect())
    }

    fn ensure(&self, needed: usize) -> Result<(), WordError> {
        match self.len() {
            Some(available) if available < needed => {
                Err(WordError::InsufficientLength { needed, available })
            }
            _ => Ok(()),
        }
    }

    /// `sigma^j omega`.
    pub fn shift(&self, j: usize) -> Result<Self, WordError> {
        self.ensure(j)?;
        if j <= self.head.len() {
            return Ok(Self {
                head: self.head[j..].to_vec(),
                cycle: self.cycle.clone(),
            });
        }
        let offset = (j - self.head.len()) % self.cycle.len();
        let mut cycle = self.cycle[offset..].to_vec();
        cycle.extend_from_slice(&self.cycle[..offset]);
        Ok(Self {
            head: Vec::new(),
            cycle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shift_into_the_cycle() {
        let w = Word::periodic(vec![0, 1], vec![2]).unwrap();
        assert_eq!(w.shift(2).unwrap(), Word::constant(2));
        assert_eq!(w.shift(0).unwrap(), w);
        assert_eq!(w.shift(7).unwrap().prefix(3).unwrap(), vec![2, 2, 2]);
    }

    #[test]
    fn finite_words_run_out() {
        let w = Word::finite(vec![3, 1]);
        assert_eq!(w.shift(2).unwrap(), Word::finite(vec![]));
        assert_eq!(
            w.shift(3),
            Err(WordError::InsufficientLength {
                needed: 3,
                available: 2
            })
        );
        assert_eq!(w.symbol(2), None);
        assert_eq!(Word::periodic(vec![1], vec![]), Err(WordError::EmptyCycle));
    }

    proptest! {
        #[test]
        fn shifts_compose(
            head in prop::collection::vec(0usize..4, 0..5),
            cycle in prop::collection::vec(0usize..4, 1..4),
            a in 0usize..9,
            b in 0usize..9,
        ) {
            let w = Word::periodic(head, cycle).unwrap();
            let twice = w.shift(a).unwrap().shift(b).unwrap();
            prop_assert_eq!(twice.prefix(12).unwrap(), w.shift(a + b).unwrap().prefix(12).unwrap());
            for i in 0..12 {
                prop_assert_eq!(twice.symbol(i), w.symbol(a + b + i));
            }
        }
    }
}
