"""Writes demo.csv: 200 rows, 5 columns, two clusters with a curved manifold."""
import math
import random

rng = random.Random(20240601)
rows = []
for i in range(200):
    t = rng.uniform(-2.0, 2.0)
    g = 1.0 if i % 2 else -1.0
    a = t + 0.1 * rng.gauss(0, 1)
    b = t * t - 1.0 + 0.2 * rng.gauss(0, 1)
    c = g * 1.5 + 0.3 * rng.gauss(0, 1)
    d = a * c / 2.0 + 0.2 * rng.gauss(0, 1)
    e = rng.gauss(0, 1)
    rows.append((a, b, c, d, e))

with open("demo.csv", "w") as f:
    f.write("alpha,beta,gamma,delta,epsilon\n")
    for r in rows:
        f.write(",".join(f"{v:.6f}" for v in r) + "\n")
