//! Bundled problems. Each entry is also shipped as `problems/<id>.json`, the expanded config.

use crate::config::{
    BoundsSpec, EvolutionSpec, ForcingSpec, MeshSpec, ProblemKind, ProblemSpec, ReactionSpec, RunConfig, SourceSpec,
};
use crate::expr::{FieldExpr, GrowthExpr, TimeProfile};
use crate::CliError;

pub const IDS: [&str; 7] = [
    "heat-benchmark",
    "variable-p-source",
    "reaction-h1",
    "reaction-h2",
    "blowup-remark24",
    "stabilize-monotone",
    "torsion-family",
];

/// Bundled JSON, in the order of [`IDS`].
pub const BUNDLED: [(&str, &str); 7] = [
    ("heat-benchmark", include_str!("../problems/heat-benchmark.json")),
    ("variable-p-source", include_str!("../problems/variable-p-source.json")),
    ("reaction-h1", include_str!("../problems/reaction-h1.json")),
    ("reaction-h2", include_str!("../problems/reaction-h2.json")),
    ("blowup-remark24", include_str!("../problems/blowup-remark24.json")),
    ("stabilize-monotone", include_str!("../problems/stabilize-monotone.json")),
    ("torsion-family", include_str!("../problems/torsion-family.json")),
];

fn sine(amplitude: f64) -> FieldExpr {
    FieldExpr::SineProduct { amplitude, k: 1.0 }
}

fn affine(c: f64, x: f64) -> FieldExpr {
    FieldExpr::Affine { c, x, y: 0.0 }
}

fn evolution(cells: usize, exponent: FieldExpr, initial: FieldExpr, forcing: ForcingSpec, horizon: f64, steps: usize) -> ProblemSpec {
    ProblemSpec {
        mesh: MeshSpec::Interval { cells },
        exponent,
        kind: ProblemKind::Evolution(EvolutionSpec { initial, forcing, horizon, steps }),
    }
}

fn reaction(source: f64, terms: Vec<(f64, i32)>, bounds: BoundsSpec) -> ForcingSpec {
    ForcingSpec::Reaction(ReactionSpec { source: FieldExpr::Constant(source), terms, bounds })
}

fn build(id: &str) -> Option<ProblemSpec> {
    let p = match id {
        // p ≡ 2, exact solution e^{−π²t} sin(πx)
        "heat-benchmark" => evolution(256, FieldExpr::Constant(2.0), sine(1.0), ForcingSpec::None, 0.1, 32),
        "variable-p-source" => evolution(
            64,
            affine(1.8, 0.6),
            FieldExpr::Bubble { amplitude: 4.0 },
            ForcingSpec::Source(SourceSpec { space: sine(1.0), time: TimeProfile::Linear { a: 1.0, b: 1.0 } }),
            0.5,
            50,
        ),
        // f = 1 + u/2, |f| ≤ 1 + |u|/2
        "reaction-h1" => evolution(
            64,
            affine(2.0, 0.5),
            sine(1.0),
            reaction(1.0, vec![(0.5, 1)], BoundsSpec::TwoSided(GrowthExpr::new(vec![1.0, 0.5]))),
            1.0,
            40,
        ),
        // logistic f = u − u², bounded by itself on both sides
        "reaction-h2" => {
            let l = GrowthExpr::new(vec![0.0, 1.0, -1.0]);
            evolution(
                64,
                affine(1.8, 0.4),
                sine(1.0),
                reaction(0.0, vec![(1.0, 1), (-1.0, 2)], BoundsSpec::Ordered { lower: l.clone(), upper: l }),
                0.5,
                50,
            )
        }
        // f = u⁴ from a large datum with negative energy; no barrier is declared
        "blowup-remark24" => {
            evolution(64, FieldExpr::Constant(2.0), sine(10.0), reaction(0.0, vec![(1.0, 4)], BoundsSpec::None), 1.0, 1000)
        }
        "stabilize-monotone" => {
            let l = GrowthExpr::new(vec![1.0, 0.0, 0.0, -1.0]);
            evolution(
                32,
                affine(1.8, 0.4),
                FieldExpr::Bubble { amplitude: 4.0 },
                reaction(1.0, vec![(-1.0, 3)], BoundsSpec::Ordered { lower: l.clone(), upper: l }),
                5.0,
                100,
            )
        }
        "torsion-family" => ProblemSpec {
            mesh: MeshSpec::Interval { cells: 64 },
            exponent: FieldExpr::Constant(3.0),
            kind: ProblemKind::Torsion { levels: vec![1.0, 2.0, 10.0] },
        },
        _ => return None,
    };
    Some(p)
}

/// The bundled entry as an inline config with default settings.
pub fn lookup(id: &str) -> Result<RunConfig, CliError> {
    build(id)
        .map(RunConfig::inline)
        .ok_or_else(|| CliError::Config(format!("unknown registry id `{id}`; known: {}", IDS.join(", "))))
}

/// Text written to `problems/<id>.json`.
pub fn render(id: &str) -> Result<String, CliError> {
    let cfg = lookup(id)?;
    let mut s = serde_json::to_string_pretty(&cfg).expect("config serializes");
    s.push('\n');
    Ok(s)
}
