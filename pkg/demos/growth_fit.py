"""Fit the cost exponent of the commuting family [s13(2^L), s24(2^L)] at p = 5."""
from dehnlab.experiments import commuting_word, fit_growth
from dehnlab.moves import verify_certificate
from dehnlab.rewrite import commute_disjoint
from dehnlab.shortcuts import shortcut_length

sizes, costs = [], []
for L in range(4, 21):
    a, b = commuting_word(L)
    cert = commute_disjoint(a, b)
    assert verify_certificate(cert)
    sizes.append(shortcut_length(a + b + a.inverse() + b.inverse()))
    costs.append(cert.total_cost)
    print(f"L = {L:>2}  lhat = {sizes[-1]:>4}  cost = {costs[-1]:.1f}")
fit = fit_growth(sizes, costs)
print(f"slope {fit.slope:.3f}, residual {fit.residual:.3f}")
