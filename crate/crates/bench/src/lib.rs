//! Shared inputs for the benchmarks.

use geyor_core::pricing::{Average, Right, Style};
use geyor_core::{AsianOption, GPoint, Market};

/// Start points for the value function, one per closed-form regime.
pub fn psi_points() -> Vec<GPoint> {
    [
        (2.0, -1.0, 1.0),
        (4.0, -2.0, 2.0),
        (0.25, -4.0, 0.5),
        (1.0, -1.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, t)| GPoint::new(x, y, t).expect("valid point"))
    .collect()
}

/// `(point, pole)` pairs inside the support of the kernel.
pub fn kernel_points() -> Vec<(GPoint, GPoint)> {
    [(1.0, -0.5, 1.0), (0.5, -2.0, 2.0), (2.0, -0.2, 0.6)]
        .iter()
        .map(|&(x, y, t)| (GPoint::new(x, y, t).expect("valid point"), GPoint::IDENTITY))
        .collect()
}

pub fn market() -> Market {
    Market {
        s0: 100.0,
        a0: 0.0,
        r: 0.05,
        sigma: 1.0,
    }
}

pub fn option(average: Average) -> AsianOption {
    AsianOption {
        style: Style::FixedStrike,
        right: Right::Call,
        average,
        strike: 100.0,
        maturity: 1.0,
    }
}
