use std::fmt;

/// A half-integer stored as its doubled value, so that l, m, n stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Labels −l, −l+1, …, l of a (2l+1)-dimensional block, in matrix index order.
    pub fn labels(two_l: u32) -> impl Iterator<Item = HalfInt> {
        let two_l = two_l as i32;
        (0..=two_l).map(move |i| HalfInt(2 * i - two_l))
    }

    /// Matrix index of this label inside the block of size 2l+1, if it fits.
    pub fn index_in(self, two_l: u32) -> Option<usize> {
        let two_l = two_l as i32;
        if self.0.abs() > two_l || (self.0 + two_l) % 2 != 0 {
            return None;
        }
        Some(((self.0 + two_l) / 2) as usize)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_and_indices_agree() {
        for two_l in 0..6u32 {
            for (i, m) in HalfInt::labels(two_l).enumerate() {
                assert_eq!(m.index_in(two_l), Some(i));
            }
        }
        assert_eq!(HalfInt::from_twice(3).index_in(1), None);
        assert_eq!(HalfInt::from_twice(0).index_in(1), None);
    }

    #[test]
    fn display() {
        assert_eq!(HalfInt::from_twice(-1).to_string(), "-1/2");
        assert_eq!(HalfInt::from_twice(4).to_string(), "2");
        assert_eq!((HalfInt::HALF + HalfInt::HALF).as_f64(), 1.0);
    }
}
