# The assignment machinery: exact brute force vs Frank-Wolfe approximation.

import time

import numpy as np

from keyfitts.qap import QapInstance, brute_force, objective, sinkhorn, solve_faq, solve_lap

# Linear assignment with lexicographic tie-breaks: on an all-ties matrix the
# identity permutation wins, which keeps every downstream artifact stable.
print("solve_lap on an all-zero 4x4:", solve_lap(np.zeros((4, 4))))

# A hand-checkable instance: heavy flow between items 0 and 1, cheap pair of
# positions 0 and 1.  Optimal cost is 26.
flow = np.array([[0, 5, 1], [5, 0, 1], [1, 1, 0]], dtype=float)
cost = np.array([[0, 1, 4], [1, 0, 4], [4, 4, 0]], dtype=float)
inst = QapInstance(flow, cost)
print("brute force :", brute_force(inst))
print("frank-wolfe :", solve_faq(inst, restarts=5, seed=0))

# Random instances: the approximation never beats the oracle and usually
# matches it.
rng = np.random.default_rng(0)
exact = 0
for s in range(30):
    m = int(rng.integers(4, 9))
    inst = QapInstance(rng.uniform(size=(m, m)), rng.uniform(size=(m, m)))
    bf = brute_force(inst)
    fw = solve_faq(inst, restarts=10, seed=s)
    assert fw.objective >= bf.objective - 1e-9
    exact += abs(fw.objective - bf.objective) < 1e-9
print(f"matched the oracle on {exact}/30 random instances")

# Sinkhorn normalization supplies the random doubly stochastic restarts.
P = sinkhorn(rng.uniform(size=(6, 6)) ** 4 + 1e-3)
print("sinkhorn row sums:", np.round(P.sum(axis=1), 12))

# Full-size solve: 27 characters onto 81 positions.
F = np.zeros((81, 81))
F[:27, :27] = rng.uniform(size=(27, 27))
F /= F.sum()
C = rng.uniform(0.1, 1.0, size=(81, 81))
t0 = time.time()
result = solve_faq(QapInstance(F, C), seed=3)
print(f"81x81 solve: objective {result.objective:.4f} in {time.time() - t0:.2f} s")
print("placement of the 27 real items:", result.mapping[:27])
assert objective(QapInstance(F, C), result.mapping) == result.objective
