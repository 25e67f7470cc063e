# Settings for the born_engine project
#
# Every value can be overridden from the environment (or a .env file) with the
# BORN_ENGINE_ prefix, e.g. BORN_ENGINE_DEFAULT_TOL=1e-12.

import os

from dotenv import load_dotenv

load_dotenv()


def _env(name, default, cast=str):
    value = os.getenv(f"BORN_ENGINE_{name}")
    return default if value is None else cast(value)


# Continuity solver tolerance (max norm on weights)
DEFAULT_TOL = _env("DEFAULT_TOL", 1e-9, float)

# Simulation defaults
DEFAULT_TRIALS = _env("DEFAULT_TRIALS", 100_000, int)
DEFAULT_SEED = _env("DEFAULT_SEED", 0, int)
DEFAULT_SHARDS = _env("DEFAULT_SHARDS", 1, int)

# Bit generator from numpy.random used by every sampler, seeded with the run
# seed (shard i uses seed + i)
PRNG_ALGORITHM = _env("PRNG_ALGORITHM", "PCG64")

# Refinement guardrails
MAX_REFINED_DIM = _env("MAX_REFINED_DIM", 10**6, int)
# Largest refined dimension built explicitly; bigger refinements are solved on
# the block quotient of the refined system
MATERIALIZE_LIMIT = _env("MATERIALIZE_LIMIT", 32, int)

# Continuity sequence: iterate i truncates |c_k|^2 to denominator 10**i
CONTINUITY_MAX_ITERATES = _env("CONTINUITY_MAX_ITERATES", 18, int)

# Float comparisons
FLOAT_TOL = _env("FLOAT_TOL", 1e-12, float)
WEIGHT_SUM_TOL = _env("WEIGHT_SUM_TOL", 1e-9, float)

# Logging
LOG_LEVEL = _env("LOG_LEVEL", "WARNING")
LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"
