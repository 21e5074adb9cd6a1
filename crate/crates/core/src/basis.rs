//! Measurement bases, the basis pairs Alice and Bob can land in, and the
//! three source intensities.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One of the three mutually unbiased bases. `Z` carries the key, `X` and
/// `Y` are only used to estimate the eavesdropper's information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub const fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Alice's preparation basis together with Bob's measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisPair {
    pub alice: Basis,
    pub bob: Basis,
}

impl BasisPair {
    pub const ZZ: BasisPair = BasisPair::new(Basis::Z, Basis::Z);
    pub const XX: BasisPair = BasisPair::new(Basis::X, Basis::X);
    pub const XY: BasisPair = BasisPair::new(Basis::X, Basis::Y);
    pub const YX: BasisPair = BasisPair::new(Basis::Y, Basis::X);
    pub const YY: BasisPair = BasisPair::new(Basis::Y, Basis::Y);

    /// The four pairs entering the quality parameter C.
    pub const ESTIMATION: [BasisPair; 4] = [Self::XX, Self::XY, Self::YX, Self::YY];

    /// Key pair followed by the four estimation pairs.
    pub const PROTOCOL: [BasisPair; 5] = [Self::ZZ, Self::XX, Self::XY, Self::YX, Self::YY];

    pub const COUNT: usize = 9;

    pub const fn new(alice: Basis, bob: Basis) -> Self {
        BasisPair { alice, bob }
    }

    pub const fn index(self) -> usize {
        self.alice.index() * 3 + self.bob.index()
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "basis pair index {index} out of range");
        BasisPair::new(Basis::ALL[index / 3], Basis::ALL[index % 3])
    }

    /// All nine combinations in index order.
    pub fn all() -> impl Iterator<Item = BasisPair> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn is_protocol_pair(self) -> bool {
        Self::PROTOCOL.contains(&self)
    }
}

impl fmt::Display for BasisPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.alice, self.bob)
    }
}

/// Source intensity class of a weak coherent pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Intensity {
    Signal,
    Decoy,
    Vacuum,
}

impl Intensity {
    pub const ALL: [Intensity; 3] = [Intensity::Signal, Intensity::Decoy, Intensity::Vacuum];

    pub const fn index(self) -> usize {
        match self {
            Intensity::Signal => 0,
            Intensity::Decoy => 1,
            Intensity::Vacuum => 2,
        }
    }
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Intensity::Signal => "signal",
            Intensity::Decoy => "decoy",
            Intensity::Vacuum => "vacuum",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_round_trips() {
        for (i, pair) in BasisPair::all().enumerate() {
            assert_eq!(pair.index(), i);
            assert_eq!(BasisPair::from_index(i), pair);
        }
    }

    #[test]
    fn five_protocol_pairs() {
        assert_eq!(BasisPair::all().filter(|p| p.is_protocol_pair()).count(), 5);
        assert!(!BasisPair::new(Basis::Z, Basis::X).is_protocol_pair());
        assert_eq!(BasisPair::XY.to_string(), "XY");
    }
}
