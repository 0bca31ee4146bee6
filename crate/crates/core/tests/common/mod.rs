//! Displayed chart equations, blow-up chart systems and chart Hamiltonians,
//! shared by the module tests and the acceptance harness.
#![allow(dead_code)]

use painleve_atlas::catalog::System;
use painleve_atlas::charts::ChartId;

/// Autonomous chart fields on c1, c2, c3.
pub fn autonomous(sys: System, chart: ChartId) -> [&'static str; 3] {
    use ChartId::*;
    use System::*;
    match (sys, chart) {
        (P1, C1) => ["3 - 12*Y1^3 - 2*Y1*Z1", "3*eps1 - 24*Y1^2*Z1 - 4*Z1^2", "eps1*(-30*Y1^2 - 5*Z1)"],
        (P1, C2) => ["-12 - 2*Z2 + 3*X2^2", "-2*eps2 + 4*X2*Z2", "5*X2*eps2"],
        (P1, C3) => ["24*Y3^2 + 4 - 3*X3*eps3", "4*X3 - 2*Y3*eps3", "-5*eps3^2"],
        (P2, C1) => [
            "-2 + Y1*(2*Y1^3 + Y1*Z1 + alpha*eps1)",
            "-2*eps1 + 2*Z1*(2*Y1^3 + Y1*Z1 + alpha*eps1)",
            "3*eps1*(2*Y1^3 + Y1*Z1 + alpha*eps1)",
        ],
        (P2, C2) => ["2*X2^2 - (2 + Z2 + alpha*eps2)", "2*X2*Z2 - eps2", "3*X2*eps2"],
        (P2, C3) => ["4*Y3^3 + 2*Y3 + 2*alpha*eps3 - 2*X3*eps3", "2*X3 - Y3*eps3", "-3*eps3^2"],
        (P4, C1) => [
            "3*Y1 - 2*kappa*eps1 - Y1^2 - 2*Y1*Z1 - Y1*(2*Y1 + 2*Z1 - 2*theta*eps1)",
            "Z1 + eps1 - Z1*(2*Y1 + 2*Z1 - 2*theta*eps1)",
            "2*eps1 - 2*eps1*(2*Y1 + 2*Z1 - 2*theta*eps1)",
        ],
        (P4, C2) => [
            "3*X2 - 2*theta*eps2 - X2^2 + 2*X2*Z2 - X2*(2*X2 - 2*Z2 - 2*kappa*eps2)",
            "Z2 + eps2 - Z2*(2*X2 - 2*Z2 - 2*kappa*eps2)",
            "2*eps2 - 2*eps2*(2*X2 - 2*Z2 - 2*kappa*eps2)",
        ],
        (P4, C3) => [
            "-X3^2 + 2*X3*Y3 + 2*X3 - 2*theta*eps3 - X3*eps3",
            "-Y3^2 + 2*X3*Y3 - 2*Y3 - 2*kappa*eps3 - Y3*eps3",
            "-2*eps3^2",
        ],
        _ => unreachable!(),
    }
}

pub fn non_autonomous(sys: System, chart: ChartId) -> [(&'static str, &'static str); 2] {
    use ChartId::*;
    use System::*;
    match (sys, chart) {
        (P1, C1) => [
            ("3 - 12*Y1^3 - 2*Y1*Z1", "eps1*(-30*Y1^2 - 5*Z1)"),
            ("3*eps1 - 24*Y1^2*Z1 - 4*Z1^2", "eps1*(-30*Y1^2 - 5*Z1)"),
        ],
        (P1, C2) => [("-12 - 2*Z2 + 3*X2^2", "5*X2*eps2"), ("-2*eps2 + 4*X2*Z2", "5*X2*eps2")],
        (P1, C3) => [("24*Y3^2 + 4 - 3*X3*eps3", "-5*eps3^2"), ("4*X3 - 2*Y3*eps3", "-5*eps3^2")],
        (P2, C1) => [
            ("-2 + Y1*(2*Y1^3 + Y1*Z1 + alpha*eps1)", "3*eps1*(2*Y1^3 + Y1*Z1 + alpha*eps1)"),
            ("-2*eps1 + 2*Z1*(2*Y1^3 + Y1*Z1 + alpha*eps1)", "3*eps1*(2*Y1^3 + Y1*Z1 + alpha*eps1)"),
        ],
        (P2, C2) => [("2*X2^2 - (2 + Z2 + alpha*eps2)", "3*X2*eps2"), ("2*X2*Z2 - eps2", "3*X2*eps2")],
        (P2, C3) => [
            ("4*Y3^3 + 2*Y3 + 2*alpha*eps3 - 2*X3*eps3", "-3*eps3^2"),
            ("2*X3 - Y3*eps3", "-3*eps3^2"),
        ],
        (P4, C1) => [
            (
                "-Y1^2 + 2*Y1 - 2*Y1*Z1 - 2*kappa*eps1 + Y1*(1 - 2*Y1 - 2*Z1 + 2*theta*eps1)",
                "2*eps1*(1 - 2*Y1 - 2*Z1 + 2*theta*eps1)",
            ),
            ("eps1 + Z1*(1 - 2*Y1 - 2*Z1 + 2*theta*eps1)", "2*eps1*(1 - 2*Y1 - 2*Z1 + 2*theta*eps1)"),
        ],
        (P4, C2) => [
            (
                "-X2^2 + 2*X2 + 2*X2*Z2 - 2*theta*eps2 + X2*(1 - 2*X2 + 2*Z2 + 2*kappa*eps2)",
                "2*eps2*(1 - 2*X2 + 2*Z2 + 2*kappa*eps2)",
            ),
            ("eps2 + Z2*(1 - 2*X2 + 2*Z2 + 2*kappa*eps2)", "2*eps2*(1 - 2*X2 + 2*Z2 + 2*kappa*eps2)"),
        ],
        (P4, C3) => [
            ("-X3^2 + 2*X3*Y3 + 2*X3 - 2*theta*eps3 - X3*eps3", "-2*eps3^2"),
            ("-Y3^2 + 2*X3*Y3 - 2*Y3 - 2*kappa*eps3 - Y3*eps3", "-2*eps3^2"),
        ],
        _ => unreachable!(),
    }
}

/// Blow-up chart systems (du/dz, dw/dz) in (u3, v3 = z, w3).
pub fn chart_displays() -> Vec<(System, &'static str, &'static str, &'static str)> {
    vec![
        (
            System::P1,
            "P1+",
            "(v3^2*w3 + 3*v3*w3^2 + 2*w3^3 - 8*u3*v3*w3^3 - 10*u3*w3^4 + 12*u3^2*w3^5)/8",
            "(4 + v3*w3^4 + w3^5 - 2*u3*w3^6)/4",
        ),
        (
            System::P1,
            "P1-",
            "(v3^2*w3 - 3*v3*w3^2 + 2*w3^3 + 8*u3*v3*w3^3 - 10*u3*w3^4 + 12*u3^2*w3^5)/8",
            "(-4 - v3*w3^4 + w3^5 - 2*u3*w3^6)/4",
        ),
        (
            System::P2,
            "P2+",
            "(4*u3*w3 - 1 - 2*alpha)*(-v3 + 2*u3*w3^2 - (1 + 2*alpha)*w3)/4",
            "(-2*u3*w3^4 + (1 + 2*alpha)*w3^3 + v3*w3^2 + 2)/2",
        ),
        (
            System::P4,
            "P4(i)",
            "-(4*theta - 8*kappa)*u3*w3 + 2*u3*v3 + 3*u3^2*w3^2 + 4*kappa*(kappa - theta)",
            "1 - 2*u3*w3^3 - 2*v3*w3 + (2*theta - 4*kappa)*w3^2",
        ),
        (
            System::P4,
            "P4(ii)",
            "3*u3^2*w3^2 - 2*u3*v3 - 4*(2*kappa - theta - 2)*u3*w3 + 4*(1 - 2*kappa + theta + kappa^2 - kappa*theta)",
            "-1 - 2*u3*w3^3 + 2*v3*w3 + 2*(2*kappa - theta - 2)*w3^2",
        ),
        (
            System::P4,
            "P4(iii)",
            "3*u3^2*w3^2 - 2*u3*v3 - (4*kappa - 8*theta)*u3*w3 + 4*theta*(theta - kappa)",
            "1 - 2*u3*w3^3 + 2*v3*w3 + (2*kappa - 4*theta)*w3^2",
        ),
    ]
}

/// Hamiltonians of the blow-up charts, up to functions of z.
pub fn printed_hamiltonians() -> Vec<(System, &'static str, &'static str)> {
    vec![
        (System::P1, "P1+", "(8*u3 + 2*u3*v3*w3^4 + 2*u3*w3^5 - 2*u3^2*w3^6 - v3^2*w3^2/2 - v3*w3^3 - w3^4/2)/8"),
        (System::P2, "P2+", "(-u3^2*w3^4 + (1 + 2*alpha)*u3*w3^3 + u3*v3*w3^2 + 2*u3)/2 - (1 + 2*alpha)*(v3*w3 + (1 + 2*alpha)*w3^2/2)/4"),
        (System::P4, "P4(i)", "u3 - u3^2*w3^3 - 2*u3*v3*w3 + (2*theta - 4*kappa)*u3*w3^2 - 4*kappa*(kappa - theta)*w3"),
        (System::P4, "P4(ii)", "-u3 - u3^2*w3^3 + 2*u3*v3*w3 + 2*(2*kappa - theta - 2)*u3*w3^2 - 4*(1 - 2*kappa + theta + kappa^2 - kappa*theta)*w3"),
        (System::P4, "P4(iii)", "u3 - u3^2*w3^3 + 2*u3*v3*w3 + (2*kappa - 4*theta)*u3*w3^2 - 4*theta*(theta - kappa)*w3"),
    ]
}
