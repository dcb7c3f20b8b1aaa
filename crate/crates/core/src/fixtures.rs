//! Published worked examples: test matrices, degrees of freedom and reported values.
//!
//! The apple rootstock and psychological test data are only available as
//! their symmetric `F_c` matrices; their degrees of freedom come from the
//! underlying designs (6 groups of 8 trees; two samples of 32).

use crate::symmat::SymMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExampleId {
    /// Apple rootstocks, one-way MANOVA.
    Ex1,
    /// Bar steel 2x4 factorial, factor A.
    Ex2A,
    /// Bar steel 2x4 factorial, factor B.
    Ex2B,
    /// Bar steel 2x4 factorial, interaction.
    Ex2AB,
    /// Psychological tests, equality of covariance matrices.
    Ex3,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [ExampleId::Ex1, ExampleId::Ex2A, ExampleId::Ex2B, ExampleId::Ex2AB, ExampleId::Ex3];

    pub fn parse(s: &str) -> Option<ExampleId> {
        match s.to_ascii_uppercase().as_str() {
            "1" => Some(ExampleId::Ex1),
            "2A" => Some(ExampleId::Ex2A),
            "2B" => Some(ExampleId::Ex2B),
            "2AB" => Some(ExampleId::Ex2AB),
            "3" => Some(ExampleId::Ex3),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExampleId::Ex1 => "1",
            ExampleId::Ex2A => "2A",
            ExampleId::Ex2B => "2B",
            ExampleId::Ex2AB => "2AB",
            ExampleId::Ex3 => "3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: ExampleId,
    pub description: &'static str,
    pub fc: Vec<Vec<f64>>,
    pub nu_h: u32,
    pub nu_e: u32,
    /// Printed eigenvalues of `fc`.
    pub eigenvalues: Vec<f64>,
    /// Printed p-value.
    pub p_value: f64,
    /// Printed norm of `-fc^{-1}`, where one is given.
    pub inverse_norm: Option<f64>,
    pub df_note: &'static str,
}

impl Example {
    pub fn fc_matrix(&self) -> SymMatrix {
        SymMatrix::from_rows(&self.fc).expect("fixture matrices are square")
    }
}

pub fn example(id: ExampleId) -> Example {
    match id {
        ExampleId::Ex1 => Example {
            id,
            description: "apple trees on 6 rootstocks, 4 growth measurements",
            fc: vec![
                vec![0.05322776, -0.01487401, 0.1982486, 0.07238464],
                vec![-0.01487401, 0.38103449, -0.3317237, 0.09765930],
                vec![0.19824861, -0.33172370, 1.6121905, 0.42164487],
                vec![0.07238464, 0.09765930, 0.4216449, 0.87498679],
            ],
            nu_h: 5,
            nu_e: 42,
            eigenvalues: vec![1.875848, 0.7906445, 0.2289795, 0.02596715],
            p_value: 8.679157e-18,
            inverse_norm: Some(38.5102),
            df_note: "6 rootstocks with 8 trees each: nu_H = 5, nu_E = 42 (assumed from the design)",
        },
        ExampleId::Ex2A => Example {
            id,
            description: "bar steel 2x4 factorial, rotational velocity (A)",
            fc: vec![vec![0.273464, 0.478255], vec![0.478255, 0.836411]],
            nu_h: 1,
            nu_e: 24,
            eigenvalues: vec![1.109875, 0.0],
            p_value: 2.765e-05,
            inverse_norm: None,
            df_note: "nu_H = 1, nu_E = 24 from the MANOVA table",
        },
        ExampleId::Ex2B => Example {
            id,
            description: "bar steel 2x4 factorial, lubricant (B)",
            fc: vec![vec![0.336837, -0.160550], vec![-0.160550, 0.100913]],
            nu_h: 3,
            nu_e: 24,
            eigenvalues: vec![0.418102, 0.019648],
            p_value: 0.0119703,
            inverse_norm: Some(50.894747),
            df_note: "nu_H = 3, nu_E = 24 from the MANOVA table",
        },
        ExampleId::Ex2AB => Example {
            id,
            description: "bar steel 2x4 factorial, interaction (AB)",
            fc: vec![vec![0.028637, 0.027744], vec![0.027744, 0.043918]],
            nu_h: 3,
            nu_e: 24,
            eigenvalues: vec![0.065054, 0.007501],
            p_value: 0.4291338,
            inverse_norm: Some(133.31874),
            df_note: "nu_H = 3, nu_E = 24 from the MANOVA table",
        },
        ExampleId::Ex3 => Example {
            id,
            description: "four psychological tests, 32 men vs 32 women, covariance equality",
            fc: vec![
                vec![0.5164511, -0.1089194, 0.2211275, 0.1108078],
                vec![-0.1089194, 0.7934331, -0.1813041, 0.0948122],
                vec![0.2211275, -0.1813041, 0.9451825, 0.1474816],
                vec![0.1108078, 0.0948122, 0.1474816, 0.4676369],
            ],
            nu_h: 31,
            nu_e: 31,
            eigenvalues: vec![1.1773492, 0.7635739, 0.4493134, 0.3324671],
            p_value: 0.0585654,
            inverse_norm: None,
            df_note: "two samples of 32: nu_1 = nu_2 = 31 (assumed)",
        },
    }
}

/// Roy statistics printed in the bar steel MANOVA table, in the order A, B, AB.
pub const ROY_TABLE: [f64; 3] = [1.10988, 0.41810, 0.06505];

/// Upper tail for factor A printed in the same table.
pub const ROY_TAIL_A: f64 = 0.0001867;
