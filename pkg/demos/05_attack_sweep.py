#!/usr/bin/env python3
# Sweeping the target-side threshold gamma: stricter gamma keeps fewer, more
# effective adversarial pairs. The sweep re-filters a generated sidecar, so
# nothing is regenerated.

from drtt import BackendHandle, DictionaryTranslator, IdentityTranslator, attack_eval, filter_records
from drtt.evaluation import sweep_to_csv

# records as written by generate_corpus (one per candidate, rejected included)
records = [
    # survives any gamma: the target-side trip actually improved
    {"id": 0, "x": "a b c", "y": "p q r", "x_delta": "aa bb cc", "y_delta": "pp qq rr",
     "d_src": 0.7, "d_tgt": -0.8, "accepted": True, "trace": []},
    # mid-range d_tgt: in only at looser thresholds
    {"id": 1, "x": "d e f", "y": "s t u", "x_delta": "dd ee ff", "y_delta": "dd ee ff",
     "d_src": 0.6, "d_tgt": 0.2, "accepted": True, "trace": []},
    # fake adversary: high d_tgt, only the degenerate gamma keeps it
    {"id": 2, "x": "g h i", "y": "v w x", "x_delta": "gg hh ii", "y_delta": "gg hh ii",
     "d_src": 0.9, "d_tgt": 0.9, "accepted": False, "trace": []},
    # never in: d_src below beta
    {"id": 3, "x": "j k", "y": "y z", "x_delta": "jj kk", "y_delta": "mm nn",
     "d_src": 0.1, "d_tgt": 0.0, "accepted": False, "trace": []},
]

beta = 0.5
for gamma in (-1.0, 0.5, 1.0):
    kept = [r["id"] for r in filter_records(records, beta, gamma)]
    print(f"gamma={gamma:>5}: accepted ids {kept}")

# the victim copies tokens through, so pairs whose y_delta differs from
# x_delta (id 0) score badly for it: exactly the low-gamma survivors
victim = BackendHandle("translator", DictionaryTranslator({}), "src2tgt")
rows = attack_eval(records, victim, gamma_grid=[-1.0, 0.5, 1e9], beta=beta)
print()
print(sweep_to_csv(rows))
# at gamma -1 only the hard pair remains -> lowest victim BLEU; as gamma
# loosens toward the single-trip criterion the average climbs
