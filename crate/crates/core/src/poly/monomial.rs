use std::cmp::Ordering;

/// Exponent vector over a fixed ambient variable list.
///
/// Ordered graded-lexicographically: higher total degree is greater, ties
/// broken by comparing exponents from the first variable on.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The constant monomial `1` over `nvars` variables.
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// The monomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    /// Componentwise minimum (the monomial gcd).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// Exponent vector with slot `i` removed.
    pub fn drop_var(&self, i: usize) -> Monomial {
        let mut e = self.0.clone();
        e.remove(i);
        Monomial(e)
    }

    /// All monomials of total degree exactly `degree` in `nvars` variables,
    /// in descending graded-lex order.
    pub fn all_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = vec![0u32; nvars];
        fill(&mut current, 0, degree, &mut out);
        out
    }

    /// All monomials of total degree `lo..=hi`, descending graded-lex order.
    pub fn all_up_to(nvars: usize, lo: u32, hi: u32) -> Vec<Monomial> {
        (lo..=hi)
            .rev()
            .flat_map(|d| Monomial::all_of_degree(nvars, d))
            .collect()
    }
}

fn fill(current: &mut Vec<u32>, slot: usize, remaining: u32, out: &mut Vec<Monomial>) {
    let n = current.len();
    if n == 0 {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if slot == n - 1 {
        current[slot] = remaining;
        out.push(Monomial(current.clone()));
        current[slot] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[slot] = e;
        fill(current, slot + 1, remaining - e, out);
    }
    current[slot] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let x2 = Monomial::new(vec![2, 0]);
        let xy = Monomial::new(vec![1, 1]);
        let y2 = Monomial::new(vec![0, 2]);
        let x = Monomial::new(vec![1, 0]);
        assert!(x2 > xy && xy > y2 && y2 > x);
    }

    #[test]
    fn enumeration_is_descending_and_complete() {
        let ms = Monomial::all_up_to(3, 0, 2);
        assert_eq!(ms.len(), 10);
        assert!(ms.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(Monomial::all_of_degree(3, 4).len(), 15);
        assert_eq!(Monomial::all_of_degree(0, 0).len(), 1);
        assert!(Monomial::all_of_degree(0, 1).is_empty());
    }
}
