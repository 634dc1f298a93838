//! JSON wire form shared by the library and the CLI:
//! `{ "num_vars": 2, "terms": [ { "exps": [1, 0], "coef": 0.5 } ] }`.

use serde::{Deserialize, Serialize};

use super::polynomial::SparsePolynomial;
use crate::error::Result;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub coef: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub num_vars: usize,
    pub terms: Vec<TermJson>,
}

impl PolynomialJson {
    pub fn from_polynomial<T: Scalar>(p: &SparsePolynomial<T>) -> Self {
        Self {
            kind: None,
            num_vars: p.num_vars(),
            terms: p
                .terms()
                .map(|(e, &c)| TermJson {
                    exps: e.clone(),
                    coef: c.as_f64(),
                })
                .collect(),
        }
    }

    pub fn to_polynomial<T: Scalar>(&self) -> Result<SparsePolynomial<T>> {
        SparsePolynomial::from_terms(
            self.num_vars,
            self.terms.iter().map(|t| (t.exps.clone(), T::of(t.coef))),
        )
    }
}

impl<T: Scalar> SparsePolynomial<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PolynomialJson::from_polynomial(
            self,
        ))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<PolynomialJson>(s)?.to_polynomial()
    }
}
