"""Template of a loop that runs deep into the cusp; parabolic faces are drawn in blue."""
import sys

from dehnlab.experiments import cusp_loop_word
from dehnlab.moves import verify_certificate
from dehnlab.templates import build_template, fill_template

L = int(sys.argv[1]) if len(sys.argv) > 1 else 16
w = cusp_loop_word(L, 5)
tpl = build_template(w)
print(f"L = {L}: word length {len(w)}, classes {tpl.class_counts()}")
cert = fill_template(tpl)
print(f"cost {cert.total_cost:.1f}, breakdown {cert.breakdown}")
print("replay:", verify_certificate(cert))
with open("cusp_loop.svg", "w") as fh:
    fh.write(tpl.svg())
print("wrote cusp_loop.svg")
