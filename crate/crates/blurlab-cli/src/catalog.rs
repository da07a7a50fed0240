//! Registry of runnable experiments and the statements each one exercises.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Experiment {
    pub id: &'static str,
    pub summary: &'static str,
    /// Manifest keys covered.
    pub covers: &'static [&'static str],
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        id: "check-lemmas",
        summary: "quick pass over every finite-n check at small sizes",
        covers: &[
            "type-counting",
            "type-classes",
            "hypergeometric-pmf",
            "trace-norm",
            "fidelity",
            "fuchs-van-de-graaf",
            "symmetric-purification",
            "type-basis",
            "partial-trace-lemma",
            "symmetrisation",
            "pure-loss",
            "fock-embedding",
            "lifted-blurring",
        ],
    },
    Experiment {
        id: "hypergeometric",
        summary: "duality, tail bounds and the lower-bound lemma, exhaustively",
        covers: &[
            "hypergeometric-pmf",
            "hypergeometric-duality",
            "hypergeometric-tails",
            "multivariate-hypergeometric",
            "hypergeometric-lower-bound",
            "type-counting",
            "type-classes",
        ],
    },
    Experiment {
        id: "divergences",
        summary: "divergence orderings, sandwich, weak-converse duality and positive-part identities",
        covers: &[
            "positive-part",
            "umegaki",
            "d-max",
            "d-hypothesis-testing",
            "smoothed-d-max",
            "dtilde-max",
            "datta-renner-sandwich",
            "classical-weak-converse",
            "trace-norm",
            "fidelity",
            "fuchs-van-de-graaf",
        ],
    },
    Experiment {
        id: "classical-lemma",
        summary: "one-shot classical blurring lemma on seeded random instances",
        covers: &["classical-blurring-map", "classical-blurring-lemma", "concentration-delta-n"],
    },
    Experiment {
        id: "classical-stein",
        summary: "one-shot generalised classical Stein inequality with product free families",
        covers: &["classical-stein-inequality", "relative-entropy-to-set", "concentration-delta-n"],
    },
    Experiment {
        id: "quantum-blurring",
        summary: "Kraus form, oracles, d_r bound, norm lemmas and the finite-n proof chain",
        covers: &[
            "rho-blurring-map",
            "symmetric-blurring-map",
            "symmetrisation",
            "gamma-decomposition",
            "kraus-operators",
            "d-r-bound",
            "theta-channel",
            "tail-filtering-lemma",
            "output-norm-proposition",
            "gqsl-chain",
            "d-max-universal-bound",
            "asymptotic-continuity",
            "type-basis",
            "partial-trace-lemma",
        ],
    },
    Experiment {
        id: "fock-convergence",
        summary: "trace-norm convergence of the lifted blurring map to the loss-damping limit",
        covers: &[
            "fock-embedding",
            "lifted-blurring",
            "entrywise-convergence",
            "loss-damping-parameters",
            "pure-loss",
        ],
    },
    Experiment {
        id: "vacuum-support",
        summary: "vacuum in the support of the delta-averaged channel; fixed-delta coherent counterexample",
        covers: &["lambda-quadrature", "support-lemma", "vacuum-in-support", "coherent-counterexample"],
    },
    Experiment {
        id: "axioms",
        summary: "free-set axiom validators on good and deliberately broken families",
        covers: &["free-set-axioms"],
    },
    Experiment {
        id: "stein-estimate",
        summary: "finite-n trend of regularised divergences to a product free family",
        covers: &["relative-entropy-to-set", "d-max-universal-bound", "dtilde-max"],
    },
];

pub fn find(id: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

/// Machine-readable list of in-scope statements.
pub const MANIFEST: &str = include_str!("../manifest.json");

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestItem {
    pub key: String,
    pub statement: String,
}

#[derive(Clone, Debug, Deserialize)]
struct Manifest {
    items: Vec<ManifestItem>,
}

pub fn manifest() -> Vec<ManifestItem> {
    serde_json::from_str::<Manifest>(MANIFEST).expect("bundled manifest parses").items
}
