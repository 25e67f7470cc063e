"""
Example session for the born_engine command line.
Run from the repository root: python example_session.py
"""

from born_engine.cli import run
from born_engine.errors import BornEngineError

MODELS = "data/models"


def derive_model(name, method="auto"):
    """Derives the weights of a model file"""
    print(f"\nDeriving weights for {name} (method: {method})")
    status = run(["derive", "--model", f"{MODELS}/{name}.json", "--method", method])
    if status != 0:
        print(f"  Exit status: {status}")
    return status


def walk_edges(name, *transforms):
    """Applies transformations and prints each consistency edge"""
    print(f"\nTransforming {name}: {' -> '.join(transforms)}")
    argv = ["equiv", "--model", f"{MODELS}/{name}.json"]
    for t in transforms:
        argv += ["--transform", t]
    return run(argv)


def simulate(name, rule="born", trials=10_000, seed=7):
    """Samples outcomes and compares them with the Born probabilities"""
    print(f"\nSimulating {name} with rule {rule}: {trials} trials, seed {seed}")
    return run(["simulate", "--model", f"{MODELS}/{name}.json", "--rule", rule, "--trials", str(trials), "--seed", str(seed)])


def pilot_wave(bias, trials=10_000, seed=7):
    """Runs the two-sided hidden-variable model"""
    print(f"\nPilot-wave run with bias {bias}")
    return run(["pilotwave", "--bias", str(bias), "--trials", str(trials), "--seed", str(seed)])


def main():
    print("=" * 50)
    print("  born_engine - Example Session")
    print("=" * 50)

    # Exact derivations
    derive_model("equalnorm_d2")
    derive_model("repeated_payoff_d3")
    derive_model("rational_1_2_3")
    derive_model("irrational_split")

    # Consistency edges
    walk_edges("equalnorm_d2", "permute:2,1", "relabel:neg")

    # Statistics
    simulate("rational_1_2")
    simulate("rational_1_2", rule="lp:1")
    pilot_wave(0.5)
    pilot_wave(0.7)


if __name__ == "__main__":
    try:
        main()
    except BornEngineError as exc:
        print(f"\nError: {exc.describe()}")
