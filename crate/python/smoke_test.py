#!/usr/bin/env python3
"""Smoke test for the qpb_py extension module.

Builds nothing itself: run `cargo build -p qpb-python` (or `--release`)
first, then `python3 python/smoke_test.py`. The script locates the compiled
cdylib under target/, stages it as an importable module, and walks the main
entry points.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> Path:
    candidates = [
        REPO_ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libqpb_py.so", "qpb_py.so", "libqpb_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("qpb_py cdylib not found; run `cargo build -p qpb-python` first")
    stage = Path(tempfile.mkdtemp(prefix="qpb-py-"))
    shutil.copy2(built, stage / "qpb_py.so")
    return stage


sys.path.insert(0, str(stage_module()))
import qpb_py  # noqa: E402

failures = []


def check(name: str, condition: bool, detail: str = "") -> None:
    status = "ok" if condition else "FAIL"
    print(f"  [{status}] {name}" + (f" ({detail})" if detail else ""))
    if not condition:
        failures.append(name)


print(f"qpb_py {qpb_py.__version__}")

# key-length accounting
row_t1 = qpb_py.keylen_table(2, 1)[0]
check(
    "keylen t=1 row is (2, 4, 3.46)",
    row_t1[1] == 2.0
    and row_t1[2] == 4.0
    and abs(row_t1[3] - math.log2(11)) < 1e-12,
    f"row={row_t1}",
)
table = qpb_py.keylen_table(2, 20)
first_sym_win = next(t for t, q, w, s in table if s < q)
first_weighted_win = next(t for t, q, w, s in table if w < q)
check("symmetric bits beat the pad first at t=6", first_sym_win == 6)
check("weighted bits beat the pad first at t=7", first_weighted_win == 7)
check(
    "qotp_key_bits(2,1,10) = 20",
    qpb_py.qotp_key_bits(2, 1, 10) == 20.0,
)

# the same-key pad attack
stat = qpb_py.dqotp_attack_statistic(2)
check("same-key attack statistic = 1/2", abs(stat - 0.5) < 1e-12, f"stat={stat}")
indep = qpb_py.dqotp_attack_statistic(2, independent_keys=True)
check("independent keys hide the plaintexts", indep < 1e-9, f"stat={indep}")

# design certification
clifford = qpb_py.Ensemble.clifford1q()
check("clifford ensemble has 24 members", len(clifford) == 24)
verdict = clifford.verify(3)
check("clifford is an exact 3-design", verdict["exact"])
check(
    "clifford frame potential at t=3 is 5",
    abs(clifford.frame_potential(3) - 5.0) < 1e-9,
)
check("haar frame potential (2,4) = 14", qpb_py.haar_frame_potential(2, 4) == 14.0)
check("clifford fails at t=4", not clifford.verify(4)["exact"])

pauli = qpb_py.Ensemble.pauli1q()
lo, choi = pauli.epsilon_bounds(2, search_budget=40, seed=7)
check("pauli t=2 epsilon lower bound >= 1/2", lo >= 0.5, f"lower={lo:.4f}")
check("bound pair is ordered", lo <= choi + 1e-12)

# symmetric subspace and symmetric designs
space = qpb_py.SymmetricSpace(2, 3)
check("d_sym(2,3) = 4", space.d_sym == 4 and qpb_py.sym_dim(2, 3) == 4)
check("projector trace = d_sym", abs(space.projector_trace() - 4.0) < 1e-9)
check("clifford is an exact symmetric 3-design", clifford.is_exact_symmetric(3))

sub8 = clifford.subsample(8, seed=1).symmetric_epsilon(3, seed=1)[1]
sub128 = clifford.subsample(128, seed=1).symmetric_epsilon(3, seed=1)[1]
check(
    "subsampled symmetric ε improves with n",
    sub128 < sub8,
    f"n=8: {sub8:.3f}, n=128: {sub128:.3f}",
)

# broadcast round trip and side information
fids = qpb_py.broadcast_roundtrip(clifford, 3, seed=5)
check(
    "broadcast round trip has unit fidelities",
    len(fids) == 3 and all(f >= 1 - 1e-10 for f in fids),
)
check(
    "side information collapses under an exact design",
    qpb_py.side_information_distance(clifford, 2) < 1e-9,
)
check(
    "non-symmetric input demo bound = 1/4",
    abs(qpb_py.nonsymmetric_input_demo() - 0.25) < 1e-10,
)

# ensemble JSON round trip
round_tripped = qpb_py.Ensemble.from_json(clifford.to_json())
check("ensemble JSON round trip preserves members", len(round_tripped) == 24)

if failures:
    sys.exit(f"smoke test FAILED: {failures}")
print("smoke test passed")
