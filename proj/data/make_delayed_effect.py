"""Writes delayed_effect.csv: a synthetic two-arm trial whose survival curves
coincide for the first half year and separate afterwards.

Control hazard 0.6/year throughout; treated hazard 0.6 before t=0.5 and 0.3
after. Response (binary) probability 0.30 control, 0.45 treated, with
responders' hazard scaled by 0.8. Uniform staggered entry gives
administrative censoring between 1.5 and 3 years, plus 5%/year dropout.
"""
import csv
import math
import random

rng = random.Random(4101)


def event_time(hazards, breaks):
    # piecewise-constant hazard; hazards[k] applies from breaks[k]
    e = rng.expovariate(1.0)
    t = 0.0
    for k, h in enumerate(hazards):
        end = breaks[k + 1] if k + 1 < len(breaks) else math.inf
        if e <= h * (end - t):
            return t + e / h
        e -= h * (end - t)
        t = end
    return math.inf


rows = []
for treat, p in ((0, 0.30), (1, 0.45)):
    for _ in range(300):
        x = 1 if rng.random() < p else 0
        scale = 0.8 if x else 1.0
        late = 0.3 if treat else 0.6
        t = event_time([0.6 * scale, late * scale], [0.0, 0.5])
        c = min(rng.uniform(1.5, 3.0), rng.expovariate(0.05))
        rows.append((round(min(t, c), 4), int(t <= c), x, treat))

with open("delayed_effect.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["time", "status", "binary", "treat"])
    w.writerows(rows)
