"""Python wrapper over the C++ core.

The native module exchanges JSON/CSV text; this wrapper decodes it into
plain dictionaries.
"""
import json

try:
    from medshift import _medshift
except ImportError:
    import _medshift

__all__ = ["law_json", "oracle", "simulate", "estimate"]


def law_json(variant="binary"):
    return json.loads(_medshift.law_json(variant))


def oracle(law=None, variant="binary", kind="odds_tilt", delta=2.0):
    law_text = json.dumps(law) if law is not None else ""
    return json.loads(_medshift.oracle(law_text, variant, kind, delta))


def simulate(law=None, variant="binary", n=1000, seed=1):
    law_text = json.dumps(law) if law is not None else ""
    return _medshift.simulate(law_text, variant, n, seed)


def estimate(csv_text, roles, kind="odds_tilt", delta=2.0, estimator="both",
             n_folds=5, seed=1, learners=None, stabilize=False):
    roles_text = json.dumps(roles) if not isinstance(roles, str) else roles
    learners_text = json.dumps(learners) if learners else ""
    return json.loads(_medshift.estimate(csv_text, roles_text, kind, delta,
                                         estimator, n_folds, seed,
                                         learners_text, stabilize))
