"""Fill a random identity word in SL(5;Z) and check the certificate."""
import random
import sys

from dehnlab.core import format_word
from dehnlab.experiments import null_homotopic_word
from dehnlab.moves import verify_certificate
from dehnlab.templates import build_template, fill_template

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
w = null_homotopic_word(random.Random(seed), 5, 120)
print(f"word of length {len(w)}: {format_word(w)[:80]}...")
tpl = build_template(w)
print(f"template: side {tpl.t}, {len(tpl.faces)} faces, classes {tpl.class_counts()}")
cert = fill_template(tpl)
print(f"{len(cert.moves)} moves, total cost {cert.total_cost:.1f}, certified {cert.certified}")
print("replay:", verify_certificate(cert))
with open("certificate.json", "w") as fh:
    fh.write(cert.to_json())
print("wrote certificate.json")
