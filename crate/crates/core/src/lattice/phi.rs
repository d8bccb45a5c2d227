//! The characteristic function `φ(A) = Σ_v 4·tcvp(A, v)` on rational
//! positive semidefinite forms.
//!
//! A semidefinite form is pushed down to the quotient lattice `Z^n / (ker A ∩ Z^n)`,
//! where it is positive definite; each parity target is projected there.

use num_bigint::BigInt;

use super::{LatticeForm, ParityVector};
use crate::arith::int::lattice_basis;
use crate::arith::{ExactMatrix, ExactScalar};
use crate::error::{Error, Result};

/// Positive definite form on the image lattice of a semidefinite form, plus the
/// projection of `Q^n` onto lattice coordinates.
struct QuotientForm {
    form: Option<LatticeForm>,
    /// `r × n`; maps a rational vector to coordinates in the quotient lattice basis.
    projection: ExactMatrix,
}

fn quotient_form(a: &ExactMatrix) -> Result<QuotientForm> {
    a.check_symmetric()?;
    let n = a.rows();
    let (rref, pivots) = a.rref();
    let r = pivots.len();
    if r == 0 {
        return Ok(QuotientForm {
            form: None,
            projection: ExactMatrix::zeros(0, n),
        });
    }
    // Rows of C span the row space of A, so ker C = ker A.
    let c = ExactMatrix::from_rows((0..r).map(|i| rref.row(i).to_vec()).collect())?;
    let cct_inv = (&c * &c.transpose())
        .inverse()
        .expect("rows of a reduced echelon form are independent");
    let a_img = &(&(&(&cct_inv * &c) * a) * &c.transpose()) * &cct_inv;

    // Lattice C·Z^n generated by the columns of C.
    let den = (0..r)
        .flat_map(|i| c.row(i).iter().map(ExactScalar::denom).collect::<Vec<_>>())
        .fold(BigInt::from(1), |acc, d| num_integer::Integer::lcm(&acc, &d));
    let den_s = ExactScalar::from_bigint(den.clone());
    let gens: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            (0..r)
                .map(|i| {
                    let v = &c[(i, j)] * &den_s;
                    v.numer()
                })
                .collect()
        })
        .collect();
    let basis = lattice_basis(&gens);
    debug_assert_eq!(basis.len(), r);
    // B has the basis vectors as columns, scaled back by 1/den.
    let mut b = ExactMatrix::zeros(r, r);
    for (k, vec) in basis.iter().enumerate() {
        for i in 0..r {
            b[(i, k)] = &ExactScalar::from_bigint(vec[i].clone()) / &den_s;
        }
    }
    let g = &(&b.transpose() * &a_img) * &b;
    let form = LatticeForm::new(&g).map_err(|_| Error::NotSemidefinite)?;
    let projection = &b.inverse().expect("lattice basis is invertible") * &c;
    Ok(QuotientForm {
        form: Some(form),
        projection,
    })
}

/// `φ(A)`; rejects forms that are not positive semidefinite.
pub fn compute_phi(a: &ExactMatrix) -> Result<ExactScalar> {
    let n = a.rows();
    if let Ok(form) = LatticeForm::new(a) {
        return Ok(phi_definite(&form));
    }
    let q = quotient_form(a)?;
    let Some(form) = q.form else {
        return Ok(ExactScalar::zero());
    };
    let four = ExactScalar::from_int(4);
    let mut total = ExactScalar::zero();
    for v in ParityVector::all(n) {
        let y = q.projection.mul_vec(&v.to_half_vector());
        // y ∈ (1/2)Z^r; reduce to its parity class (integral targets contribute 0).
        let doubled: Vec<i64> = y
            .iter()
            .map(|t| (t * &ExactScalar::from_int(2)).to_i64().expect("half-integral target"))
            .collect();
        if let Some(cls) = ParityVector::of_vector(&doubled) {
            total += &(&four * &form.class_cvp(cls).min_value);
        }
    }
    Ok(total)
}

fn phi_definite(form: &LatticeForm) -> ExactScalar {
    let four = ExactScalar::from_int(4);
    ParityVector::all(form.dim())
        .map(|v| &four * &form.class_cvp(v).min_value)
        .sum()
}
