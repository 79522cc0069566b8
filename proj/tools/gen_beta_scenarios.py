"""Writes the discretized Beta and value-table scenario files into scenarios/."""
import json
from math import comb
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "scenarios"
BETAS = [(4, 1), (3, 1), (3, 2), (2, 2), (3, 3), (4, 4), (2, 3), (1, 3), (1, 4)]
SUPPORT = [0.2, 0.4, 0.6, 0.8, 1.0]


def beta_cdf(x, a, b):
    # Integer parameters: the regularized incomplete beta is a binomial tail.
    n = a + b - 1
    return sum(comb(n, j) * x**j * (1 - x) ** (n - j) for j in range(a, n + 1))


def beta_masses(a, b):
    edges = [0.0] + SUPPORT
    return [beta_cdf(hi, a, b) - beta_cdf(lo, a, b) for lo, hi in zip(edges, edges[1:])]


def sweep_scenario(sid, probs, seed):
    regular = {
        "types": [f"{v:.1f}" for v in SUPPORT],
        "type_dist": probs,
        "values": [[v] for v in SUPPORT],
        "ctrs": 1.0,
    }
    strong = {
        "types": ["absent", "present"],
        "type_dist": [0.5, 0.5],
        "values": [[0.0], [2.0]],
        "ctrs": [[0.0], [1.0]],
    }
    return {
        "id": sid,
        "queries": ["q"],
        "query_dist": [1.0],
        "bidders": [regular, regular, strong, strong],
        "bid_grid": {"max_index": 44, "denominator": 20},
        "clauses": "full",
        "mechanism": {"rule": "soft", "floor": 0.0},
        "learner": {"algorithm": "hedge", "eta": 0.02},
        "horizon": 500000,
        "window_fraction": 0.1,
        "env_seed": seed,
    }


TABLES = {
    "uniform": [0.250, 0.625, 1.000, 1.250, 1.500, 1.875, 2.250],
    "right_skewed": [0.194, 0.357, 0.543, 0.700, 0.902, 1.374, 2.522],
    "left_skewed": [0.278, 1.426, 1.900, 2.100, 2.257, 2.443, 2.606],
}
WEIGHTS = [10, 15, 15, 10, 10, 15, 15]


def value_table_scenario(name, values, seed):
    probs = [w / 90 for w in WEIGHTS]
    probs[-1] = 1.0 - sum(probs[:-1])
    return {
        "id": f"values_{name}",
        "queries": ["q"],
        "query_dist": [1.0],
        "num_bidders": 2,
        "bidder": {
            "types": [f"{v:.3f}" for v in values],
            "type_dist": probs,
            "values": [[v] for v in values],
            "ctrs": 1.0,
        },
        "bid_grid": {"max_index": 40, "denominator": 10},
        "clauses": "full",
        "mechanism": {"rule": "second"},
        "learner": {"algorithm": "hedge", "eta": 0.02},
        "horizon": 200000,
        "window_fraction": 0.1,
        "env_seed": seed,
    }


def dump(doc, name):
    (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")


def main():
    for k, (a, b) in enumerate(BETAS):
        probs = beta_masses(a, b)
        probs[-1] = 1.0 - sum(probs[:-1])
        dump(sweep_scenario(f"beta_{a}_{b}", probs, 20240400 + k), f"beta_{a}_{b}.json")
    for k, (name, values) in enumerate(TABLES.items()):
        dump(value_table_scenario(name, values, 20240500 + k), f"values_{name}.json")


if __name__ == "__main__":
    main()
