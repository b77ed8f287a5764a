use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Rational;

/// One tableau row: integer numerators over a shared positive denominator.
#[derive(Debug, Clone)]
pub struct Row {
    pub num: Vec<BigInt>,
    pub den: BigInt,
}

impl Row {
    pub fn from_rationals(values: &[Rational]) -> Self {
        let mut den = BigInt::one();
        for v in values {
            den = den.lcm(v.denom());
        }
        let num = values
            .iter()
            .map(|v| v.numer() * (&den / v.denom()))
            .collect();
        Row { num, den }
    }

    pub fn value(&self, j: usize) -> Rational {
        Rational::new(self.num[j].clone(), self.den.clone())
    }

    pub fn sign(&self, j: usize) -> Sign {
        self.num[j].sign()
    }

    /// Divides numerators and denominator by their common content.
    fn reduce(&mut self) {
        let mut g = self.den.clone();
        for n in &self.num {
            if g.is_one() {
                return;
            }
            if !n.is_zero() {
                g = g.gcd(n);
            }
        }
        if !g.is_one() {
            for n in self.num.iter_mut() {
                *n /= &g;
            }
            self.den /= &g;
        }
    }
}

/// Dense simplex tableau in basis-reduced form. The objective row is stored
/// separately and updated by the same pivot arithmetic; its rhs cell holds
/// the negated objective value.
#[derive(Debug, Clone)]
pub struct Tableau {
    pub rows: Vec<Row>,
    pub obj: Row,
    /// Basic column per row.
    pub basis: Vec<usize>,
    /// Total column count excluding the rhs cell.
    pub n_cols: usize,
}

impl Tableau {
    pub fn rhs_col(&self) -> usize {
        self.n_cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        self.rows[i].value(j)
    }

    pub fn rhs(&self, i: usize) -> Rational {
        let c = self.rhs_col();
        self.rows[i].value(c)
    }

    pub fn reduced_cost(&self, j: usize) -> Rational {
        self.obj.value(j)
    }

    pub fn objective_value(&self) -> Rational {
        -self.obj.value(self.rhs_col())
    }

    /// Pivots on (row, col). The entry must be nonzero; feasibility upkeep is
    /// the caller's job (ratio test).
    pub fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.rows[p].num[q].clone();
        debug_assert!(!piv.is_zero());
        let pivot_nums = self.rows[p].num.clone();

        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            update_row(row, &pivot_nums, &piv, q);
        }
        update_row(&mut self.obj, &pivot_nums, &piv, q);

        // The pivot row keeps its numerators; only the denominator changes.
        let prow = &mut self.rows[p];
        prow.den = piv;
        if prow.den.is_negative() {
            prow.den = -prow.den.clone();
            for n in prow.num.iter_mut() {
                *n = -n.clone();
            }
        }
        prow.reduce();
        self.basis[p] = q;
    }
}

/// row := row - (row[q]/piv) * pivot_row, in shared-denominator arithmetic.
/// Rows with a zero multiplier are untouched.
fn update_row(row: &mut Row, pivot_nums: &[BigInt], piv: &BigInt, q: usize) {
    let factor = row.num[q].clone();
    if factor.is_zero() {
        return;
    }
    for (n, pn) in row.num.iter_mut().zip(pivot_nums) {
        let mut v = &*n * piv;
        if !pn.is_zero() {
            v -= &factor * pn;
        }
        *n = v;
    }
    row.den = &row.den * piv;
    if row.den.is_negative() {
        row.den = -row.den.clone();
        for n in row.num.iter_mut() {
            *n = -n.clone();
        }
    }
    row.reduce();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    #[test]
    fn pivot_matches_rational_elimination() {
        // 2x + y = 4 ; x + 3y = 7, pivot on (0,0) then (1,1).
        let mut t = Tableau {
            rows: vec![
                Row::from_rationals(&[ratio(2, 1), ratio(1, 1), ratio(4, 1)]),
                Row::from_rationals(&[ratio(1, 1), ratio(3, 1), ratio(7, 1)]),
            ],
            obj: Row::from_rationals(&[ratio(0, 1), ratio(0, 1), ratio(0, 1)]),
            basis: vec![0, 1],
            n_cols: 2,
        };
        t.pivot(0, 0);
        t.pivot(1, 1);
        assert_eq!(t.rhs(0), ratio(1, 1));
        assert_eq!(t.rhs(1), ratio(2, 1));
        assert_eq!(t.entry(0, 0), ratio(1, 1));
        assert_eq!(t.entry(0, 1), ratio(0, 1));
    }
}
