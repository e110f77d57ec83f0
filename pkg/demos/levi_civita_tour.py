"""
Arithmetic with infinitesimals
==============================

A short tour of the truncated Levi-Civita field: series in a positive
infinitesimal ``e`` with fractional exponents, ordered by their leading term.
"""

from ultramorse import LeviCivitaNumber as LC
from ultramorse import classify, extend_function, infinitely_close, parse_series, shadow

# The infinitesimal itself, and a couple of numbers built from it.
e = LC.epsilon()
x = 2 + 3 * e
y = parse_series("1/e + 4")
print("x =", x)
print("y =", y)

# Infinitesimals sit below every positive real, infinite numbers above them.
for n in (10, 10**6):
    print(f"e < 1/{n}:", e < 1 / n, "   y >", n, ":", y > n)

# Division goes through a geometric series, so 1/(1 + e) is 1 - e + e^2 - ...
print("1/(1 + e) =", 1 / (1 + e))

# Each number is infinitesimal, finite or infinite; inverses swap the outer two.
for z in (e**2, x, y, 1 / y):
    print(f"{classify(z).value:<24} shadow {shadow(z):<5}  {z}")

# The shadow forgets infinitesimal detail.
print("x ~ 2:", infinitely_close(x, LC.real(2)), "  x ~ 3:", infinitely_close(x, LC.real(3)))

# Smooth real functions extend by Taylor expansion around the shadow.  Only
# three derivatives are supplied here, so the expansion stops at the cubic term.
import math

sin_at = extend_function(math.sin, [math.cos, lambda t: -math.sin(t), lambda t: -math.cos(t)],
                         parse_series("e^(1/2)"))
print("sin(e^(1/2)) =", sin_at)
