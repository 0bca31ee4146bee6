//! The builtin systems P_I, P_II and P_IV with symbolic parameters.

use crate::algebra::{parse_poly, sym, Poly, Var};
use crate::charts::{to_chart, ChartId, ChartVectorField};
use crate::newton_weights::{newton_diagram, PlanarODE, Weights};
use serde::Serialize;
use std::fmt;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum System {
    P1,
    P2,
    P4,
}

impl System {
    pub const ALL: [System; 3] = [System::P1, System::P2, System::P4];

    pub fn parse(tag: &str) -> Option<System> {
        match tag.to_ascii_uppercase().replace('_', "").as_str() {
            "P1" | "PI" => Some(System::P1),
            "P2" | "PII" => Some(System::P2),
            "P4" | "PIV" => Some(System::P4),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            System::P1 => "P1",
            System::P2 => "P2",
            System::P4 => "P4",
        }
    }

    pub fn ode(self) -> PlanarODE {
        let (f, g) = match self {
            System::P1 => ("6*y^2 + z", "x"),
            System::P2 => ("2*y^3 + y*z + alpha", "x"),
            System::P4 => ("-x^2 + 2*x*y + 2*x*z - 2*theta", "-y^2 + 2*x*y - 2*y*z - 2*kappa"),
        };
        PlanarODE::new(parse_poly(f).unwrap(), parse_poly(g).unwrap())
    }

    /// Weights read off the Newton diagram of the full system.
    pub fn weights(self) -> Weights {
        let nd = newton_diagram(&self.ode()).expect("builtin systems have one compact face");
        Weights::new(nd.normal[0], nd.normal[1], nd.normal[2], nd.level).unwrap()
    }

    /// The associated field in `chart`, in the reporting orientation.
    pub fn chart_field(self, chart: ChartId) -> ChartVectorField {
        let vf = to_chart(&self.ode(), &self.weights(), chart).expect("builtin systems are ℤ_s-invariant");
        if self.chart_orientation(chart) < 0 {
            vf.negated()
        } else {
            vf
        }
    }

    /// H with dx/dz = −∂H/∂y, dy/dz = ∂H/∂x.
    pub fn hamiltonian(self) -> Poly {
        let h = match self {
            System::P1 => "x^2/2 - 2*y^3 - z*y",
            System::P2 => "x^2/2 - y^4/2 - z*y^2/2 - alpha*y",
            System::P4 => "-x*y^2 + x^2*y - 2*x*y*z - 2*kappa*x + 2*theta*y",
        };
        parse_poly(h).unwrap()
    }

    pub fn parameters(self) -> Vec<Var> {
        match self {
            System::P1 => vec![],
            System::P2 => vec![sym::alpha()],
            System::P4 => vec![sym::kappa(), sym::theta()],
        }
    }

    /// Time orientation of the associated vector field in each chart.
    ///
    /// The derivation fixes each field only up to a unit; these signs select
    /// the orientation in which the builtin fields are reported.
    pub fn chart_orientation(self, chart: ChartId) -> i64 {
        match (self, chart) {
            (System::P1, ChartId::C2) | (System::P2, ChartId::C2) | (System::P2, ChartId::C1) => -1,
            _ => 1,
        }
    }

    /// Number of Laurent families, hence of blow-up charts.
    pub fn expected_families(self) -> usize {
        match self {
            System::P1 => 1,
            System::P2 => 2,
            System::P4 => 3,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}
