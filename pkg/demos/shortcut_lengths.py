"""Print word lengths of e13(2^k) against the logarithmic bound."""
import math

from dehnlab.core import IntegerMatrix, evaluate
from dehnlab.shortcuts import C_SC, build_shortcut, length_bound

print(f"{'k':>3} {'length':>7} {'bound':>7} {'ratio':>6}")
for k in range(0, 65, 4):
    x = 2 ** k
    w = build_shortcut(1, 3, x, 3)
    assert evaluate(w) == IntegerMatrix.elementary(3, 1, 3, x)
    ratio = len(w) / (1 + math.floor(math.log2(x)))
    print(f"{k:>3} {len(w):>7} {length_bound(x):>7.0f} {ratio:>6.2f}")
print(f"shipped C_sc = {C_SC}")
