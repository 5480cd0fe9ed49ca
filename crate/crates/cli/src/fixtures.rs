//! Built-in scenarios, one per example flow.

use kasner_core::exact::{FamilySpec, NutParams, Spacing, TimeGrid};
use kasner_core::regime::DetectorConfig;

use crate::scenario::{Scenario, Source};

pub struct Fixture {
    pub name: &'static str,
    /// What the fixture models and which diagnostics its report should show.
    pub anchor: &'static str,
    pub scenario: fn() -> Scenario,
}

fn family(name: &str, family: FamilySpec, grid: Option<TimeGrid>) -> Scenario {
    Scenario {
        name: name.to_string(),
        source: Source::Family { family, grid },
        detector: DetectorConfig::default(),
        output_dir: None,
    }
}

fn log_grid(t_min: f64, t_max: f64, count: usize) -> Option<TimeGrid> {
    Some(TimeGrid {
        t_min,
        t_max,
        count,
        spacing: Spacing::Log,
    })
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "cone",
        anchor: "Lorentzian cone over hyperbolic 3-space (Milne): L = 1, K0 = 0, t^2 R = -6, dvol ~ t^3",
        scenario: || family("cone", FamilySpec::Cone, log_grid(1e-3, 1.0, 400)),
    },
    Fixture {
        name: "cone-times-torus",
        anchor: "cone over a hyperbolic surface times a flat circle: dvol ~ t^2, neither Milne nor Kasner",
        scenario: || family("cone-times-torus", FamilySpec::ConeTimesTorus { flat_dim: 1 }, log_grid(1e-3, 1.0, 400)),
    },
    Fixture {
        name: "kasner-fixture",
        anchor: "flat Kasner (2/3, 2/3, -1/3): L = 1/3, R = 0, t^2 |K|^2 = 9, dvol ~ t",
        scenario: || {
            family(
                "kasner-fixture",
                FamilySpec::Kasner { exponents: [2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0] },
                log_grid(1e-3, 1.0, 400),
            )
        },
    },
    Fixture {
        name: "kantowski-sachs",
        anchor: "Schwarzschild interior m = 1/2: t ~ t_H^(2/3), t_H^2 R -> 0, Kasner (2/3, 2/3, -1/3) limit",
        scenario: || family("kantowski-sachs", FamilySpec::KantowskiSachs { mass: 0.5 }, log_grid(1e-8, 0.5, 2000)),
    },
    Fixture {
        name: "taub-nut",
        anchor: "Taub part of Taub-NUT as LRS Bianchi IX data: limit exponents (1, 0, 0)",
        scenario: || {
            family(
                "taub-nut",
                FamilySpec::TaubNut(NutParams { sigma_plus: 0.3, n1: 1.5, tau_span: 60.0, max_step: Some(0.01) }),
                None,
            )
        },
    },
    Fixture {
        name: "bianchi8-nut",
        anchor: "Bianchi VIII NUT as LRS Bianchi VIII data: limit exponents (1, 0, 0)",
        scenario: || {
            family(
                "bianchi8-nut",
                FamilySpec::BianchiViiiNut(NutParams { sigma_plus: 0.0, n1: 0.5, tau_span: 60.0, max_step: Some(0.01) }),
                None,
            )
        },
    },
    Fixture {
        name: "gowdy-asymptotic",
        anchor: "polarized Gowdy fiber, asymptotic model (velocity 1/2): Kasner limit, t_H ~ e^(-(v^2+3) tau/4)",
        scenario: || {
            family(
                "gowdy-asymptotic",
                FamilySpec::GowdyAsymptotic { velocity: 0.5, alpha: 0.1, omega: 0.2 },
                log_grid(1e-3, 1.0, 400),
            )
        },
    },
    Fixture {
        name: "mixmaster-period2",
        anchor: "Bianchi IX shadowing the golden-ratio heteroclinic cycle: recurring non-Kasner epochs, F(N)/N falling",
        scenario: || Scenario {
            name: "mixmaster-period2".to_string(),
            source: Source::Cycle {
                period: None,
                orbit_index: 0,
                offset: 1e-4,
                signs: [1, 1, 1],
                tau_span: 100.0,
                max_step: Some(0.01),
            },
            detector: DetectorConfig::default(),
            output_dir: None,
        },
    },
];

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// One line per fixture: the padded name, then its anchor.
pub fn catalog() -> String {
    let width = FIXTURES.iter().map(|f| f.name.len()).max().unwrap_or(0);
    FIXTURES
        .iter()
        .map(|f| format!("{:<width$}  {}\n", f.name, f.anchor))
        .collect()
}
